import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config import ESTIMATION_CONFIG
from core.types import Dataset, IndexSet, PathStep, SelectionResult, as_index_set
from estimators.covariance import check_vce
from selection.overid import SUPPORTED_TESTS, run_test, testing_threshold
from utils.errors import DataValidationError, SelectionExhaustedError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Candidate:
    """路径上的一个候选模型：调节参数与被视为无效的份额"""

    tuning: float
    invalid: IndexSet


def monotone_candidates(candidates: Sequence[Candidate]) -> List[Candidate]:
    """去掉重复的无效集以及比已出现的无效集更小的集合，保证检验顺序上无效集大小单调不减"""
    seen = set()
    kept: List[Candidate] = []
    largest = -1
    for cand in candidates:
        invalid = as_index_set(cand.invalid)
        if invalid in seen:
            continue
        seen.add(invalid)
        if len(invalid) < largest:
            logger.info(f"跳过路径上缩小的无效集 {invalid} (调节参数 {cand.tuning:.6g})")
            continue
        largest = len(invalid)
        kept.append(Candidate(cand.tuning, invalid))
    return kept


class BaseSelector(ABC):
    """无效份额选择器抽象类

    子类给出按顺序排列的候选模型，select 统一执行向下检验：
    依次检验各候选模型，第一个 p 值超过显著性水平的模型即为结果。
    """

    method = 'base'

    def __init__(self, test: str = 'hs', threshold: Optional[float] = None,
                 c: Optional[float] = None, vce: Optional[str] = None):
        """
        Args:
            test: 过度识别检验 ('hs', 'ar')
            threshold: 固定显著性水平，缺省为 c / ln(n)
            c: 显著性水平常数
            vce: 检验与恰好识别标准误使用的协方差类型
        """
        test = test.lower().strip()
        if test not in SUPPORTED_TESTS:
            raise DataValidationError(
                f"不支持的检验: {test}. 支持的检验: {', '.join(SUPPORTED_TESTS)}"
            )
        self.test = test
        self.threshold = threshold
        self.c = ESTIMATION_CONFIG['c'] if c is None else c
        self.vce = check_vce(vce or ESTIMATION_CONFIG['vce'])

    @abstractmethod
    def candidate_models(self, d: Dataset) -> List[Candidate]:
        """按检验顺序排列的候选模型（子类实现）"""
        pass

    def diagnostics(self, d: Dataset, chosen: Candidate) -> Dict[str, Any]:
        return {}

    def exhaustion_advice(self) -> Tuple[str, ...]:
        return ()

    def select(self, d: Dataset) -> SelectionResult:
        """执行选择

        Returns:
            SelectionResult: 有效/无效集合与完整检验路径

        Raises:
            SelectionExhaustedError: 有效集缩小到 P 个之前没有模型通过检验
        """
        level = testing_threshold(d.n, self.c, self.threshold)
        logger.info(f"开始 {self.method} 选择: n={d.n}, J={d.J}, P={d.P}, "
                    f"检验={self.test}, vce={self.vce}, 显著性水平={level:.6g}")

        candidates = monotone_candidates(self.candidate_models(d))
        path: List[PathStep] = []
        for k, cand in enumerate(candidates):
            valid = d.complement(cand.invalid)
            if len(valid) <= d.P:
                break
            outcome = run_test(d, self.test, valid, cand.invalid, self.vce)
            path.append(PathStep(tuning=float(cand.tuning), invalid=cand.invalid,
                                 stat=outcome.stat, df=outcome.df, p_value=outcome.p_value))
            logger.info(f"  调节参数 {cand.tuning:.6g}: 无效 {d.names_of(cand.invalid)}, "
                        f"统计量 {outcome.stat:.4f}, p={outcome.p_value:.4g}")
            if outcome.p_value > level:
                rest = tuple((float(c.tuning), c.invalid) for c in candidates[k + 1:])
                if rest:
                    logger.info(f"在第 {k + 1} 步停止，其后 {len(rest)} 个候选模型未检验: "
                                f"{[d.names_of(inv) for _, inv in rest]}")
                result = SelectionResult(
                    valid_set=valid,
                    invalid_set=cand.invalid,
                    path=tuple(path),
                    method=self.method,
                    test=self.test,
                    threshold=level,
                    stopped_at=len(path) - 1,
                    z_names=d.z_names,
                    n_endog=d.P,
                    vce=self.vce,
                    untested=rest,
                    diagnostics=self.diagnostics(d, cand),
                )
                logger.info(f"{self.method} 选择完成: 无效份额 {result.invalid_names}")
                return result

        message = (f"{self.method} 选择路径耗尽: 有效集缩小到 {d.P + 1} 个之前没有模型通过 "
                   f"{self.test} 检验 (显著性水平 {level:.6g})，可能违反多数或相对多数假设")
        logger.error(message)
        raise SelectionExhaustedError(message, path, self.exhaustion_advice())
