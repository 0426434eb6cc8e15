from string import Template


class Texts:
    RUN_STARTED = "🚀 Запуск рендера"
    MASKS_DONE = "✅ Маски записаны"
    SCENE_MISSING = "❌ Файл сцены не найден"
    SCENE_INVALID = "❌ Сцена не прошла проверку"
    REPORT_INVALID = "❌ Отчёт не соответствует схеме"
    CONTRACT_BROKEN = "⛔ Нарушено условие"
    NO_REGRESSION = "✅ Регрессий нет"

    run_summary_template = Template("""
📊 <$effect> $width x $height, $samples сэмплов
━━━━━━━━━━━━━━━
⚙️ Доля работы: $work_ratio
📉 Экономия: $reduction
🎯 RMS: $rms
📏 Макс. ошибка: $max_abs
━━━━━━━━━━━━━━━
📁 $out_dir
""")

    compare_row_template = Template("$name  $a  ->  $b  ($delta)")

    @staticmethod
    def run_summary(effect: str, width: int, height: int, samples: int, work_ratio, reduction, rms, max_abs, out_dir) -> str:
        return Texts.run_summary_template.substitute(
            effect=effect.upper(),
            width=width,
            height=height,
            samples=samples,
            work_ratio=Texts.number(work_ratio),
            reduction=Texts.percent(reduction),
            rms=Texts.number(rms),
            max_abs=Texts.number(max_abs),
            out_dir=out_dir,
        )

    @staticmethod
    def compare_row(name: str, a, b) -> str:
        delta = "—" if a is None or b is None else f"{b - a:+.6f}"
        return Texts.compare_row_template.substitute(name=f"{name:<16}", a=Texts.number(a), b=Texts.number(b), delta=delta)

    @staticmethod
    def regression(name: str, delta: float, limit: float) -> str:
        return f"⚠️ Регрессия {name}: {delta:+.6f} > {limit}"

    @staticmethod
    def sweep_point(samples: int, width: int, height: int, work_ratio: float, rms) -> str:
        return f"🔁 {samples} сэмплов, {width}x{height}: работа {work_ratio:.4f}, RMS {Texts.number(rms)}"

    @staticmethod
    def number(value) -> str:
        return "—" if value is None else f"{value:.6f}"

    @staticmethod
    def percent(value) -> str:
        return "—" if value is None else f"{value * 100:.1f}%"
