"""Сохранение и загрузка артефактов эксперимента."""

import json
from pathlib import Path
from typing import List, Sequence

from pydantic import ValidationError

from async_election.metrics.summary import format_verdicts, to_csv
from async_election.models import ExperimentConfig, RunReport, SweepRow, Verdict
from async_election.output.directory_builder import REPORTS_DIR, TRACES_DIR
from async_election.simnet.trace import Trace
from async_election.utils.exceptions import OutputError, TraceParseError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)

SUMMARY_FILE = "summary.csv"
VERDICTS_FILE = "verdicts.txt"
VERDICTS_JSON = "verdicts.json"
CONFIG_FILE = "config.yaml"


class FileManager:
    """Менеджер файлов каталога эксперимента."""

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)

    @staticmethod
    def save_text(path: Path, content: str) -> Path:
        """
        Записывает текстовый файл, создавая каталоги.

        Raises:
            OutputError: При ошибках записи
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(content)
        except OSError as e:
            raise OutputError(f"Ошибка сохранения файла {path}: {e}") from e

        logger.debug(f"Файл сохранен: {path} ({len(content)} символов)")
        return path

    def save_report(self, report: RunReport, stem: str) -> Path:
        return self.save_text(self.output_dir / REPORTS_DIR / f"{stem}.json", report.model_dump_json(indent=2) + "\n")

    def save_trace(self, trace: Trace, stem: str, compress: bool = False) -> Path:
        return trace.to_jsonl(self.output_dir / TRACES_DIR / f"{stem}.jsonl", compress=compress)

    def save_summary(self, rows: Sequence[SweepRow]) -> Path:
        return self.save_text(self.output_dir / SUMMARY_FILE, to_csv(rows))

    def save_verdicts(self, verdicts: Sequence[Verdict]) -> Path:
        self.save_text(
            self.output_dir / VERDICTS_JSON,
            json.dumps([v.model_dump(mode="json") for v in verdicts], indent=2, ensure_ascii=False) + "\n",
        )
        return self.save_text(self.output_dir / VERDICTS_FILE, format_verdicts(verdicts))

    def save_config(self, config: ExperimentConfig) -> Path:
        return self.save_text(self.output_dir / CONFIG_FILE, config.to_yaml())

    @staticmethod
    def load_reports(reports_dir: Path) -> List[RunReport]:
        """
        Загружает отчеты прогонов из каталога, в порядке имен файлов.

        Args:
            reports_dir: Каталог reports/ или каталог эксперимента

        Returns:
            Отчеты

        Raises:
            TraceParseError: Файл не разбирается как RunReport
        """
        reports_dir = Path(reports_dir)
        if (reports_dir / REPORTS_DIR).is_dir():
            reports_dir = reports_dir / REPORTS_DIR
        if not reports_dir.is_dir():
            raise TraceParseError(f"Каталог отчетов не найден: {reports_dir}")

        reports = []
        for path in sorted(reports_dir.glob("*.json")):
            try:
                reports.append(RunReport.model_validate_json(path.read_text(encoding="utf-8")))
            except (OSError, ValidationError) as e:
                raise TraceParseError(f"Некорректный отчет {path}: {e}") from e
        logger.info(f"Загружено отчетов: {len(reports)} из {reports_dir}")
        return reports
