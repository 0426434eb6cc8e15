import os

from dotenv import load_dotenv

load_dotenv()

# Потоки для параллельного рендера уровней
THREADS = int(os.getenv("MULTIRES_THREADS", "4"))

# Лог ошибок
ERROR_LOG_PATH = os.getenv("MULTIRES_ERROR_LOG", "errors.log")

# Дисперсии и веса по уровням (1 = полное разрешение, 4 = 1/8). None = уровень не используется
LEVEL_DIVISORS = (1, 2, 4, 8)
LEVEL_TABLE = {
    "ssao": ((0.924, 100.0), (1.848, 50.0), (3.696, 20.0), (0.0, 1.0)),
    "ssm": ((0.924, 1000.0), (1.848, 1000.0), (3.696, 1000.0), (0.0, 1.0)),
    "ssgi": ((0.924, 1000.0), None, (0.924, 100.0), (0.0, 1.0)),
}

# Количество сэмплов по умолчанию
DEFAULT_SAMPLES = {"ssao": 64, "ssm": 196, "ssgi": 288}

# Лесенки сэмплов для sweep
SAMPLE_LADDERS = {
    "ssao": (16, 32, 64, 128, 256),
    "ssm": (100, 144, 196, 256, 324),
    "ssgi": (24, 80, 288, 1088, 4224),
}

DEFAULT_RADIUS = 0.5            # мировые единицы (SSAO / SSGI)
DEFAULT_PCF_RADIUS = 2.0        # тексели карты теней
DEFAULT_SEED = 1337
SSAO_BIAS = 0.025               # доля от радиуса
SSGI_EPSILON = 1e-4             # доля от radius²

NORMAL_THRESHOLD = 0.05
DEPTH_THRESHOLD_FRACTION = 0.02  # доля от диапазона глубин сцены

SHADOW_RESOLUTION = 1024
SHADOW_BIAS_FRACTION = 1e-3      # доля от диагонали сцены

BLUR_CUTOFF = 1e-6
SSAO_BLUR_VARIANCE = 1.0
DIFF_ENHANCEMENT = 10.0
