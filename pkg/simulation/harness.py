"""蒙特卡洛实验

每次重复生成一个数据集，比较标准 2SLS（全部份额有效）、oracle 2SLS（真实无效份额作控制变量）
以及 aLasso / CIM 选择后的 2SLS。每次重复的种子由 (seed, 重复编号) 派生，结果与并行调度无关。
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

try:
    from tqdm import tqdm
    HAS_TQDM = True
except ImportError:
    HAS_TQDM = False

from config import IO_CONFIG, SIMULATION_CONFIG
from core.types import DgpConfig
from estimators.tsls import fit_2sls
from selection.factory import SelectorFactory
from simulation.dgp import (generate, late_plurality_config, majority_config,
                            multi_regressor_config, plurality_config)
from utils.errors import DataValidationError, ShiftShareError
from utils.logger import temporary_level

logger = logging.getLogger(__name__)

SUPPORTED_METHODS = ('standard', 'oracle', 'alasso', 'cim')
SUPPORTED_DESIGNS = ('majority', 'plurality', 'weak_strong_grid', 'multi_regressor',
                     'late_plurality')
DESIGN_ALIASES = {'multi': 'multi_regressor', 'grid': 'weak_strong_grid'}

CSV_COLUMNS = ['design', 'cell', 'n', 'P', 'J', 'n_invalid_true', 'method', 'mad',
               'mean_n_invalid', 'freq_all_invalid', 'oracle_F', 'failures', 'reps', 'seed',
               'schema_version']


@dataclass(frozen=True)
class CellMetrics:
    """一个参数组合下某个估计方法的汇总指标

    mad 为 max_p |β̂_p - β₀_p| 在成功重复上的中位数；freq_all_invalid 的分母为全部重复次数，
    失败的重复不计入 mad 和 mean_n_invalid。
    """

    method: str
    mad: float
    mean_n_invalid: float
    freq_all_invalid: float
    oracle_F: float
    failures: int
    reps: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _replicate(cfg: DgpConfig, seed: int, rep: int, methods: Sequence[str], vce: str,
               test: str, log_level: Optional[str] = None) -> Dict[str, Any]:
    """单次重复，返回各方法的 (β̂, Î) 或失败标记以及 oracle 第一阶段 F

    记录器级别在重复内部设置，loky 工作进程不继承父进程的级别。
    """
    with temporary_level(log_level or SIMULATION_CONFIG['replicate_log_level']):
        return _run_replicate(cfg, seed, rep, methods, vce, test)


def _run_replicate(cfg: DgpConfig, seed: int, rep: int, methods: Sequence[str], vce: str,
                   test: str) -> Dict[str, Any]:
    d = generate(cfg, np.random.SeedSequence([seed, rep]))
    true_valid, true_invalid = cfg.true_valid, cfg.true_invalid
    record: Dict[str, Any] = {}

    oracle = fit_2sls(d, true_valid, true_invalid, vce=vce)
    record['oracle_F'] = oracle.first_stage_F

    for method in methods:
        if method == 'standard':
            fit, invalid = fit_2sls(d, tuple(range(d.J)), vce=vce), ()
        elif method == 'oracle':
            fit, invalid = oracle, true_invalid
        else:
            try:
                selector = SelectorFactory.create_selector(method, test=test, vce=vce)
                result = selector.select(d)
                fit = fit_2sls(d, result.valid_set, result.invalid_set, vce=vce)
                invalid = result.invalid_set
            except ShiftShareError as e:
                logger.debug(f"重复 {rep}: {method} 失败: {e}")
                record[method] = None
                continue
        record[method] = (np.asarray(fit.beta, dtype=float), tuple(invalid))
    return record


def _aggregate(cfg: DgpConfig, records: List[Dict[str, Any]], methods: Sequence[str],
               reps: int) -> Dict[str, CellMetrics]:
    truth = set(cfg.true_invalid)
    oracle_F = float(np.mean([r['oracle_F'] for r in records]))
    metrics = {}
    for method in methods:
        done = [r[method] for r in records if r[method] is not None]
        failures = reps - len(done)
        if done:
            deviations = [float(np.max(np.abs(beta - cfg.beta0))) for beta, _ in done]
            mad = float(np.median(deviations))
            mean_n_invalid = float(np.mean([len(inv) for _, inv in done]))
        else:
            mad = mean_n_invalid = float('nan')
        hits = sum(1 for _, inv in done if truth <= set(inv))
        metrics[method] = CellMetrics(
            method=method,
            mad=mad,
            mean_n_invalid=mean_n_invalid,
            freq_all_invalid=hits / reps,
            oracle_F=oracle_F,
            failures=failures,
            reps=reps,
        )
    return metrics


def run_cell(cfg: DgpConfig, reps: Optional[int] = None, methods: Optional[Sequence[str]] = None,
             seed: Optional[int] = None, vce: Optional[str] = None, test: str = 'hs',
             n_jobs: Optional[int] = None, show_progress: bool = False) -> Dict[str, CellMetrics]:
    """运行一个参数组合的全部重复

    Args:
        cfg: 数据生成参数
        reps: 重复次数
        methods: 估计方法，缺省为 standard/oracle/alasso，P=1 时加上 cim
        seed: 主种子
        vce: 检验、组合估计和 2SLS 使用的协方差类型
        test: 向下检验使用的过度识别检验
        n_jobs: joblib 并行进程数
        show_progress: 是否显示进度条

    Returns:
        dict: 方法名 -> CellMetrics

    Raises:
        DataValidationError: 不支持的方法或 P>1 时请求 cim
    """
    reps = reps or SIMULATION_CONFIG['reps']
    seed = SIMULATION_CONFIG['seed'] if seed is None else seed
    vce = vce or SIMULATION_CONFIG['vce']
    n_jobs = n_jobs or SIMULATION_CONFIG['n_jobs']
    if methods is None:
        methods = SUPPORTED_METHODS if cfg.P == 1 else ('standard', 'oracle', 'alasso')
    unknown = [m for m in methods if m not in SUPPORTED_METHODS]
    if unknown:
        raise DataValidationError(
            f"不支持的方法: {unknown}. 支持的方法: {', '.join(SUPPORTED_METHODS)}"
        )
    if cfg.P > 1 and 'cim' in methods:
        raise DataValidationError("置信区间法只支持一个内生变量")

    iterator: Iterable[int] = range(reps)
    if HAS_TQDM and show_progress:
        iterator = tqdm(iterator, total=reps, desc=f"{cfg.design} n={cfg.n}")
    level = SIMULATION_CONFIG['replicate_log_level']
    records = Parallel(n_jobs=n_jobs)(
        delayed(_replicate)(cfg, seed, rep, tuple(methods), vce, test, level) for rep in iterator
    )
    metrics = _aggregate(cfg, records, methods, reps)
    logger.info(f"{cfg.design} n={cfg.n} P={cfg.P} 无效 {len(cfg.true_invalid)} 个: " + ", ".join(
        f"{m} mad={c.mad:.4f} freq={c.freq_all_invalid:.2f} fail={c.failures}"
        for m, c in metrics.items()
    ))
    return metrics


def _cells(design: str, n_grid: Sequence[int], P: Optional[int], seed: int,
           z_law: Optional[str] = None) -> List[tuple]:
    """(单元标签, DgpConfig) 列表"""
    if design == 'majority':
        return [(f"n={n}", majority_config(n, seed=seed, z_law=z_law)) for n in n_grid]
    if design == 'plurality':
        return [(f"n={n}", plurality_config(n, seed=seed, z_law=z_law)) for n in n_grid]
    if design == 'late_plurality':
        return [(f"n={n}", late_plurality_config(n, seed=seed)) for n in n_grid]
    if design == 'weak_strong_grid':
        cells = []
        for builder in (majority_config, plurality_config):
            for gamma in (0.6, 0.3):
                for scale in (1.0, 2.0):
                    for n in n_grid:
                        cfg = builder(n, gamma=gamma, alpha_scale=scale, seed=seed, z_law=z_law)
                        cells.append((f"{cfg.design}:gamma={gamma:g}:alpha_x{scale:g}:n={n}", cfg))
        return cells
    if design == 'multi_regressor':
        J = SIMULATION_CONFIG['multi_J']
        cells = []
        for p in ((P,) if P else (1, 2, 3)):
            for k in range(J - max(p, 2) + 1):
                cells.append((f"P={p}:invalid={k}", multi_regressor_config(p, k, seed=seed)))
        return cells
    raise DataValidationError(
        f"不支持的设计: {design}. 支持的设计: {', '.join(SUPPORTED_DESIGNS)}"
    )


def sweep(design: str, n_grid: Optional[Sequence[int]] = None, reps: Optional[int] = None,
          seed: Optional[int] = None, methods: Optional[Sequence[str]] = None,
          vce: Optional[str] = None, test: str = 'hs', n_jobs: Optional[int] = None,
          P: Optional[int] = None, show_progress: bool = False,
          z_law: Optional[str] = None) -> pd.DataFrame:
    """按设计遍历全部参数组合，每个 (单元, 方法) 输出一行

    z_law 只作用于 majority、plurality 和 weak_strong_grid，其余设计固定为 uniform(0,1)。

    Returns:
        pd.DataFrame: 列为 CSV_COLUMNS
    """
    design = DESIGN_ALIASES.get(design.lower().strip(), design.lower().strip())
    n_grid = list(n_grid or SIMULATION_CONFIG['n_grid'])
    reps = reps or SIMULATION_CONFIG['reps']
    seed = SIMULATION_CONFIG['seed'] if seed is None else seed

    cells = _cells(design, n_grid, P, seed, z_law)
    logger.info(f"开始 {design} 实验: {len(cells)} 个参数组合，每个 {reps} 次重复，种子 {seed}")

    rows = []
    for label, cfg in cells:
        metrics = run_cell(cfg, reps=reps, methods=methods, seed=seed, vce=vce, test=test,
                           n_jobs=n_jobs, show_progress=show_progress)
        for method, cell in metrics.items():
            rows.append({
                'design': design,
                'cell': label,
                'n': cfg.n,
                'P': cfg.P,
                'J': cfg.J,
                'n_invalid_true': len(cfg.true_invalid),
                'method': method,
                'mad': cell.mad,
                'mean_n_invalid': cell.mean_n_invalid,
                'freq_all_invalid': cell.freq_all_invalid,
                'oracle_F': cell.oracle_F,
                'failures': cell.failures,
                'reps': cell.reps,
                'seed': seed,
                'schema_version': IO_CONFIG['schema_version'],
            })
    return pd.DataFrame(rows, columns=CSV_COLUMNS)
