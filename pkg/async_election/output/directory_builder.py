"""Построитель структуры каталога артефактов."""

from pathlib import Path

from async_election.utils.exceptions import OutputError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)

REPORTS_DIR = "reports"
TRACES_DIR = "traces"


class DirectoryBuilder:
    """Построитель каталога эксперимента: reports/ для отчетов, traces/ для трасс."""

    @staticmethod
    def build_structure(output_dir: Path) -> Path:
        """
        Создает структуру каталогов.

        Args:
            output_dir: Базовый каталог

        Returns:
            Базовый каталог

        Raises:
            OutputError: Каталог нельзя создать
        """
        output_dir = Path(output_dir)
        try:
            output_dir.mkdir(parents=True, exist_ok=True)
            (output_dir / REPORTS_DIR).mkdir(exist_ok=True)
            (output_dir / TRACES_DIR).mkdir(exist_ok=True)
        except OSError as e:
            raise OutputError(f"Не удалось создать каталог {output_dir}: {e}") from e

        logger.debug(f"Структура каталогов создана в {output_dir}")
        return output_dir
