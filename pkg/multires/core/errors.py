class MultiresError(Exception):
    """Базовая ошибка пакета"""


class ContractViolation(MultiresError, ValueError):
    """Нарушено предусловие или инвариант"""


class SceneFormatError(MultiresError, ValueError):
    """Файл сцены не разбирается"""


class ReportFormatError(MultiresError, ValueError):
    """Файл отчёта не соответствует схеме"""
