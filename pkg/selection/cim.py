"""置信区间法 (CIM) 无效份额选择

每个份额的恰好识别估计构成区间 β̂_j ± ψ·se_j，按下端点排序后，与第 j 个区间下端点
重叠的区间组成一组，最大的一组视为有效。ψ 从 ψ₀ = psif·√(2.01²·ln n) 开始沿重叠
状态的断点逐步减小，每个不同的最大组做一次过度识别检验。
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config import ESTIMATION_CONFIG
from core.types import Dataset, IndexSet, SelectionResult
from estimators.combinations import CombinationEstimates, just_identified
from selection.base import BaseSelector, Candidate
from utils.errors import DataValidationError, UndefinedTestError, UnsupportedModelError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntervalSet:
    """按下端点升序（下端点相同时按下标）排列的区间"""

    index: Tuple[int, ...]
    lower: np.ndarray
    upper: np.ndarray
    psi: float

    def __len__(self) -> int:
        return len(self.index)


def _require_single(ce: CombinationEstimates) -> None:
    if ce.P != 1:
        raise UnsupportedModelError(
            f"置信区间法只支持一个内生变量，当前 P={ce.P}；多个内生变量请使用 alasso"
        )


def build_intervals(ce: CombinationEstimates, psi: float, warn: bool = True) -> IntervalSet:
    """每个份额的区间 β̂_j ± ψ·se_j

    Args:
        ce: P=1 的恰好识别估计
        psi: 临界值，必须非负
        warn: 是否为被剔除的份额记录警告

    Raises:
        UnsupportedModelError: P != 1
    """
    _require_single(ce)
    if psi < 0 or not np.isfinite(psi):
        raise DataValidationError(f"临界值 ψ 必须为非负有限数: {psi}")

    beta = ce.betas[:, 0]
    se = ce.ses[:, 0]
    index = np.array([S[0] for S in ce.combos])
    ok = np.isfinite(beta) & np.isfinite(se)
    if warn and not ok.all():
        logger.warning(f"{int((~ok).sum())} 个份额的估计或标准误无效，不参与分组: "
                       f"{index[~ok].tolist()}")

    index, lower, upper = index[ok], beta[ok] - psi * se[ok], beta[ok] + psi * se[ok]
    order = np.lexsort((index, lower))
    return IntervalSet(index=tuple(int(j) for j in index[order]),
                       lower=lower[order], upper=upper[order], psi=float(psi))


def largest_group(iv: IntervalSet) -> IndexSet:
    """最大的重叠组

    第 j 个区间（排序后）的组为 {k ≤ j: ciu_k > cil_j} ∪ {j}。
    大小相同时取排序后字典序最小的组，即包含最小原始下标的组。
    """
    if len(iv) == 0:
        return ()
    best: Optional[IndexSet] = None
    tied = set()
    for pos in range(len(iv)):
        members = [iv.index[k] for k in range(pos) if iv.upper[k] > iv.lower[pos]]
        group = tuple(sorted(members + [iv.index[pos]]))
        if best is None or len(group) > len(best):
            best, tied = group, {group}
        elif len(group) == len(best):
            tied.add(group)
            best = min(best, group)
    if len(tied) > 1:
        logger.info(f"ψ={iv.psi:.6g} 时有 {len(tied)} 个大小为 {len(best)} 的组，取 {best}")
    return best


def psi_breakpoints(ce: CombinationEstimates) -> np.ndarray:
    """两两区间重叠状态改变处的 ψ 值 (β̂_j - β̂_k)/(se_j + se_k)，去重后降序"""
    _require_single(ce)
    beta = ce.betas[:, 0]
    se = ce.ses[:, 0]
    ok = np.isfinite(beta) & np.isfinite(se)
    beta, se = beta[ok], se[ok]

    gap = beta[:, None] - beta[None, :]
    width = se[:, None] + se[None, :]
    mask = (gap > 0) & (width > 0)
    points = np.unique(gap[mask] / width[mask])
    return points[::-1]


def psi_schedule(psi0: float, breakpoints: np.ndarray) -> List[float]:
    """ψ₀ 之后取 ψ₀ 以下相邻断点的中点，最后取最小断点的一半"""
    below = [float(b) for b in breakpoints if b < psi0]
    schedule = [float(psi0)]
    schedule += [(a + b) / 2 for a, b in zip(below, below[1:])]
    if below:
        schedule.append(below[-1] / 2)
    return schedule


def initial_psi(n: int, psif: float) -> float:
    return float(psif * np.sqrt(2.01 ** 2 * np.log(n)))


class CimSelector(BaseSelector):
    method = 'cim'

    def __init__(self, test: str = 'hs', threshold: Optional[float] = None,
                 c: Optional[float] = None, vce: Optional[str] = None,
                 psif: Optional[float] = None):
        super().__init__(test, threshold, c, vce)
        self.psif = ESTIMATION_CONFIG['psif'] if psif is None else psif
        if self.psif <= 0:
            raise DataValidationError(f"psif 必须为正: {self.psif}")
        self._ce: Optional[CombinationEstimates] = None
        self._psi0 = float('nan')

    def candidate_models(self, d: Dataset) -> List[Candidate]:
        if d.P != 1:
            raise UnsupportedModelError(
                f"置信区间法只支持一个内生变量，当前 P={d.P}；多个内生变量请使用 alasso"
            )
        if d.J <= d.P:
            raise UndefinedTestError(d.J, d.P)

        self._ce = just_identified(d, self.vce)
        self._psi0 = initial_psi(d.n, self.psif)
        schedule = psi_schedule(self._psi0, psi_breakpoints(self._ce))
        logger.info(f"ψ₀={self._psi0:.6g}，共 {len(schedule)} 个候选 ψ")

        candidates: List[Candidate] = []
        seen = set()
        for k, psi in enumerate(schedule):
            group = largest_group(build_intervals(self._ce, psi, warn=(k == 0)))
            if len(group) < 2:
                break
            if group in seen:
                continue
            seen.add(group)
            candidates.append(Candidate(psi, d.complement(group)))
        return candidates

    def diagnostics(self, d: Dataset, chosen: Candidate) -> Dict[str, Any]:
        if self._ce is None:
            return {}
        return {
            'psi0': self._psi0,
            'psif': self.psif,
            'psi': float(chosen.tuning),
            'just_identified': {
                'beta': [float(b) for b in self._ce.betas[:, 0]],
                'se': [float(s) for s in self._ce.ses[:, 0]],
            },
            'dropped_combos': self._ce.dropped,
        }

    def exhaustion_advice(self) -> Tuple[str, ...]:
        return ('增大 --psif 以从更宽的置信区间开始',
                '或通过 --siglevel / --c 调整显著性水平')


def cim_select(d: Dataset, test: str = 'hs', threshold: Optional[float] = None,
               psif: Optional[float] = None, **options: Any) -> SelectionResult:
    return CimSelector(test=test, threshold=threshold, psif=psif, **options).select(d)
