"""Модели данных библиотеки."""

import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# ранги генерируются numpy int64 и передаются как u64
MAX_RANK = 2 ** 63 - 1


class GraphFamilyTag(str, Enum):
    """Семейство топологий."""

    RING = "ring"
    TORUS_2D = "torus-2d"
    COMPLETE = "complete"
    RANDOM = "connected-uniform-random"
    EDGE_LIST = "from-edge-list"


class GraphFamily(BaseModel):
    """Описание топологии: семейство и его параметры."""

    family: GraphFamilyTag = Field(..., description="Семейство графов")
    n: Optional[int] = Field(default=None, description="Число узлов (для edge-list берется из файла)")
    edge_probability: Optional[float] = Field(
        default=None, description="Вероятность ребра для connected-uniform-random"
    )
    edge_count: Optional[int] = Field(
        default=None, description="Число ребер для connected-uniform-random (вместо вероятности)"
    )
    rows: Optional[int] = Field(default=None, description="Число строк тора")
    cols: Optional[int] = Field(default=None, description="Число столбцов тора")
    edges: Optional[List[Tuple[int, int]]] = Field(default=None, description="Явный список ребер")
    edge_list_path: Optional[Path] = Field(default=None, description="Файл со списком ребер")

    model_config = ConfigDict(frozen=True)

    @property
    def label(self) -> str:
        """Короткое имя семейства для сводок."""
        return self.family.value


class NEstimateKind(str, Enum):
    """Как узлы знают n."""

    EXACT = "exact"
    LOWER = "lower"  # c1 * n <= n' <= n
    UPPER = "upper"  # n <= n* <= c2 * n


class NEstimatePolicy(BaseModel):
    """Политика оценки n, известной узлам."""

    kind: NEstimateKind = Field(default=NEstimateKind.EXACT, description="Тип оценки")
    factor: float = Field(default=1.0, gt=0.0, description="c1 для lower, c2 для upper")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_factor(self) -> "NEstimatePolicy":
        if self.kind == NEstimateKind.LOWER and not 0.0 < self.factor <= 1.0:
            raise ValueError("для lower-оценки c1 должно лежать в (0, 1]")
        if self.kind == NEstimateKind.UPPER and self.factor < 1.0:
            raise ValueError("для upper-оценки c2 должно быть >= 1")
        return self

    def estimate(self, n: int) -> int:
        """
        Возвращает значение n, сообщаемое узлам.

        Args:
            n: Реальное число узлов

        Returns:
            Оценка n' (или n*)
        """
        if self.kind == NEstimateKind.LOWER:
            return max(2, min(n, math.ceil(self.factor * n)))
        if self.kind == NEstimateKind.UPPER:
            return max(n, math.floor(self.factor * n))
        return n

    def admits(self, n: int, n_estimate: int) -> bool:
        """Проверяет, что реальное n лежит в объявленном множителе от оценки."""
        if self.kind == NEstimateKind.LOWER:
            return self.factor * n <= n_estimate <= n
        if self.kind == NEstimateKind.UPPER:
            return n <= n_estimate <= self.factor * n
        return n_estimate == n


class ProtocolParams(BaseModel):
    """Параметры протокола, известные узлам, и аналитический верхний кворум."""

    n_estimate: int = Field(..., ge=2, description="Значение n, известное узлам")
    role_coefficient: float = Field(..., gt=0.0, description="Коэффициент c вероятности ролей")
    quorum_fraction: float = Field(..., gt=0.0, description="Доля q: quorum_low = ceil(q*c*log2 n)")
    quorum_low: int = Field(..., ge=1, description="Порог одобрений для избрания")
    quorum_high_analysis: int = Field(..., ge=1, description="Верхняя граница, только для метрик")
    rank_space_max: int = Field(..., le=MAX_RANK, description="Ранги берутся из [1, rank_space_max]")
    role_probability: float = Field(..., gt=0.0, le=1.0, description="Вероятность каждой роли")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_invariants(self) -> "ProtocolParams":
        if self.rank_space_max < self.n_estimate ** 2:
            raise ValueError("rank_space_max должно быть не меньше n_estimate^2")
        return self

    @property
    def mu(self) -> float:
        """Ожидаемое число кандидатов (и рефери) c*log2(n_estimate)."""
        return self.role_coefficient * math.log2(self.n_estimate)

    @classmethod
    def build(
        cls,
        n_estimate: int,
        role_coefficient: float = 16.0,
        quorum_fraction: float = 0.8,
        quorum_low: Optional[int] = None,
        rank_space_max: Optional[int] = None,
    ) -> "ProtocolParams":
        """
        Вычисляет производные параметры по (n_estimate, c, q).

        Args:
            n_estimate: Оценка n
            role_coefficient: Коэффициент c
            quorum_fraction: Доля q
            quorum_low: Явный порог (переопределяет формулу)
            rank_space_max: Явная верхняя граница рангов (по умолчанию n^4, не больше MAX_RANK)

        Returns:
            Параметры протокола

        Raises:
            ValueError: pydantic-валидация нарушенных инвариантов
        """
        log_n = math.log2(n_estimate) if n_estimate >= 2 else 0.0
        mu = role_coefficient * log_n
        return cls(
            n_estimate=n_estimate,
            role_coefficient=role_coefficient,
            quorum_fraction=quorum_fraction,
            quorum_low=quorum_low if quorum_low is not None else max(1, math.ceil(quorum_fraction * mu)),
            quorum_high_analysis=max(1, math.ceil(1.1 * mu)),
            rank_space_max=rank_space_max if rank_space_max is not None else min(n_estimate ** 4, MAX_RANK),
            role_probability=min(1.0, mu / n_estimate) if n_estimate >= 2 else 1.0,
        )


class ForcedRoles(BaseModel):
    """Принудительное назначение ролей вместо подбрасывания монет."""

    candidates: Optional[int] = Field(default=None, ge=0, description="Число кандидатов")
    referees: Optional[int] = Field(default=None, ge=0, description="Число рефери")
    candidate_nodes: Optional[List[int]] = Field(default=None, description="Явные кандидаты")
    referee_nodes: Optional[List[int]] = Field(default=None, description="Явные рефери")

    model_config = ConfigDict(frozen=True)

    @property
    def active(self) -> bool:
        return any(
            v is not None
            for v in (self.candidates, self.referees, self.candidate_nodes, self.referee_nodes)
        )


class AdversarySpec(BaseModel):
    """Выбор противника из встроенного каталога."""

    name: str = Field(default="uniform-delay", description="Имя политики задержек/порядка")
    wakeup: str = Field(default="single", description="Расписание пробуждения: single, all, random-subset")
    initiator: int = Field(default=0, ge=0, description="Инициатор для wakeup=single")
    seed: Optional[int] = Field(default=None, description="Зерно противника (иначе из зерна прогона)")

    model_config = ConfigDict(frozen=True)

    @property
    def label(self) -> str:
        return f"{self.name}/{self.wakeup}"


class TraceRetention(str, Enum):
    """Какие трассы сохранять."""

    NONE = "none"
    FAILURES_ONLY = "failures-only"
    ALL = "all"


class ProtocolSpec(BaseModel):
    """Параметры протокола в конфигурации эксперимента."""

    preset: str = Field(default="desk", description="Пресет констант: paper или desk")
    role_coefficient: Optional[float] = Field(default=None, gt=0.0, description="Переопределение c")
    quorum_fraction: Optional[float] = Field(default=None, gt=0.0, description="Переопределение q")
    quorum_low: Optional[int] = Field(default=None, ge=1, description="Явный порог одобрений")
    rank_space_max: Optional[int] = Field(default=None, ge=1, le=MAX_RANK, description="Явная граница рангов")
    n_estimate_policy: NEstimatePolicy = Field(default_factory=NEstimatePolicy)
    forced: ForcedRoles = Field(default_factory=ForcedRoles)
    rank_tiebreak: bool = Field(default=False, description="Дописывать индекс узла к рангу (отладка)")
    distinct_ranks: bool = Field(default=False, description="Перезапуск прогона при совпадении рангов")
    max_rank_retries: int = Field(default=10, ge=0, description="Лимит перезапусков")


class ExperimentConfig(BaseModel):
    """Полная конфигурация эксперимента."""

    graphs: List[GraphFamily] = Field(..., min_length=1, description="Семейства топологий")
    sizes: List[int] = Field(default_factory=list, description="Значения n для свипа")
    protocol: ProtocolSpec = Field(default_factory=ProtocolSpec)
    adversaries: List[AdversarySpec] = Field(default_factory=lambda: [AdversarySpec()], min_length=1)
    trials: int = Field(default=1, ge=1, description="Прогонов на точку")
    seed: int = Field(default=0, ge=0, description="Мастер-зерно")
    output_path: Path = Field(default=Path("./election_runs"), description="Каталог артефактов")
    keep_traces: TraceRetention = Field(default=TraceRetention.FAILURES_ONLY)
    gzip_traces: bool = Field(default=False, description="Сжимать трассы gzip")
    workers: int = Field(default=1, ge=1, description="Параллельных процессов")
    max_events: int = Field(default=10 ** 9, ge=1, description="Лимит событий на прогон")

    @field_validator("sizes")
    @classmethod
    def _check_sizes(cls, v: List[int]) -> List[int]:
        for n in v:
            if n < 2:
                raise ValueError(f"n={n}: сеть из одного узла вырождена, требуется n >= 2")
        return v

    @model_validator(mode="after")
    def _check_graph_sizes(self) -> "ExperimentConfig":
        for graph in self.graphs:
            if graph.family != GraphFamilyTag.EDGE_LIST and not self.sizes and graph.n is None:
                raise ValueError(f"для семейства {graph.family.value} не задано n")
            if graph.n is not None and graph.n < 2:
                raise ValueError(f"n={graph.n}: требуется n >= 2")
        return self

    def to_yaml(self) -> str:
        """Каноническое текстовое представление конфигурации."""
        data = self.model_dump(mode="json", exclude_none=True)
        return yaml.safe_dump(data, sort_keys=True, allow_unicode=True)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        """Разбирает каноническое представление."""
        return cls.model_validate(yaml.safe_load(text) or {})


class RunFlags(BaseModel):
    """Флаги исхода прогона."""

    rank_collision: bool = Field(default=False, description="Совпали ранги двух узлов")
    election_failure: bool = Field(default=False, description="Лидер не избран")
    non_quiescent: bool = Field(default=False, description="Прогон прерван по лимиту событий")


class RunReport(BaseModel):
    """Итог одного прогона."""

    n: int = Field(..., description="Число узлов")
    m: int = Field(..., description="Число ребер")
    D: int = Field(..., description="Диаметр")
    family: str = Field(default="", description="Семейство графа")
    adversary: str = Field(default="", description="Противник")
    seed: int = Field(default=0, description="Зерно прогона")
    trial: int = Field(default=0, description="Номер прогона в точке")

    n_estimate: int = Field(..., description="Оценка n у узлов")
    role_coefficient: float = Field(..., description="c")
    role_probability: float = Field(..., description="Вероятность роли")
    quorum_low: int = Field(..., description="Порог одобрений")

    leaders_elected: List[int] = Field(default_factory=list, description="Ранги избранных")
    agreed_leader: Optional[int] = Field(default=None, description="Общий лидер всех узлов")
    n_candidates: int = Field(default=0, description="N_C")
    n_referees: int = Field(default=0, description="N_R")
    total_transmissions: int = Field(default=0, description="Передач по ребрам")
    unique_messages: int = Field(default=0, description="Различных сгенерированных сообщений")
    max_payload_transmissions: int = Field(default=0, description="Максимум передач одного сообщения")
    max_referee_generated: int = Field(default=0, description="Максимум сообщений одного рефери")
    terminated_nodes: int = Field(default=0, description="Завершившихся узлов")
    completion_time: float = Field(
        default=0.0, description="Последнее событие минус первое пробуждение, включая досылку Leader"
    )
    election_time: Optional[float] = Field(
        default=None,
        description="Время выборов: момент избрания лидера, раньше completion_time на досылку Leader",
    )
    all_awake_time: Optional[float] = Field(default=None, description="Момент пробуждения последнего узла")
    failure_reason: Optional[str] = Field(default=None, description="no-candidate, referee-shortfall, stalled")
    flags: RunFlags = Field(default_factory=RunFlags)

    @property
    def exactly_one_leader(self) -> bool:
        return len(self.leaders_elected) == 1 and self.agreed_leader is not None


class VerdictStatus(str, Enum):
    """Итог проверки."""

    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"
    CLASSIFIED = "classified"
    INAPPLICABLE = "inapplicable"


class Verdict(BaseModel):
    """Результат одной проверки."""

    name: str = Field(..., description="Имя проверки")
    status: VerdictStatus = Field(..., description="Статус")
    hard: bool = Field(default=False, description="Жесткая проверка влияет на код выхода")
    message: str = Field(default="", description="Пояснение")
    details: Dict[str, Any] = Field(default_factory=dict, description="Подробности")
    fitted: Optional[float] = Field(default=None, description="Подобранная константа")

    @property
    def failed(self) -> bool:
        return self.status == VerdictStatus.FAIL


class SweepRow(BaseModel):
    """Строка сводки по точке (n, семейство, противник)."""

    n: int
    family: str
    adversary: str
    trials: int
    exactly_one_rate: float
    multi_leader_count: int
    collision_count: int
    failure_count: int
    kappa_mean: float
    kappa_max: float
    tau_mean: float
    tau_max: float
    nc_mean: float
    nc_std: float
    nr_mean: float
    nr_std: float


class ExperimentResult(BaseModel):
    """Итог эксперимента."""

    exit_code: int = Field(..., description="0, если все жесткие проверки прошли")
    reports: List[RunReport] = Field(default_factory=list, description="Отчеты в порядке (точка, прогон)")
    rows: List[SweepRow] = Field(default_factory=list, description="Сводка свипа")
    verdicts: List[Verdict] = Field(default_factory=list, description="Вердикты свипа")
    output_dir: Optional[Path] = Field(default=None, description="Каталог артефактов")
    retries: int = Field(default=0, description="Перезапусков из-за совпадения рангов")
    traces_kept: int = Field(default=0, description="Сохранено трасс")
