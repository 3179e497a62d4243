"""命令实现

每个命令接收一个 RunConfig，把结果写到 --out（缺省为标准输出）。
领域错误在 run_command 中统一转换为结构化的错误 JSON 和退出码 1。
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd

from cli.run_config import RunConfig
from config import IO_CONFIG
from core.dataset import load_dataset
from core.shift_share import build_ssiv, load_shift_share
from core.types import Dataset, SelectionResult, ShiftShareInputs
from estimators.factory import EstimatorFactory
from selection.factory import SelectorFactory
from simulation.harness import sweep
from utils.errors import DataValidationError, ShiftShareError
from utils.io import read_json, write_csv, write_json

logger = logging.getLogger(__name__)


def _require(rc: RunConfig, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if not getattr(rc, n)]
    if missing:
        raise DataValidationError(f"{rc.command} 命令缺少参数: {', '.join(missing)}")


def load_run_dataset(rc: RunConfig) -> Dataset:
    """按 RunConfig 中的列角色读取数据集"""
    _require(rc, 'data', 'y', 'x')
    if not rc.z_list and not rc.z_stub:
        raise DataValidationError("需要通过 --z-stub 或 --z-list 指定工具变量")
    roles: Dict[str, Any] = {
        'y': rc.y,
        'x': rc.x,
        'controls': rc.controls,
        'weights': rc.weights,
        'cluster': rc.cluster,
        'ids': [c for c in (rc.location, rc.period) if c],
    }
    if rc.z_list:
        roles['z'] = rc.z_list
    else:
        roles['z_stub'] = rc.z_stub
    return load_dataset(rc.data, roles, delimiter=rc.delimiter, constant=rc.constant,
                        demean_by=rc.demean_by)


def class_labels(rc: RunConfig, names: Sequence[str]) -> List[str]:
    """份额列名去掉前缀后作为类别标签"""
    stub = rc.z_stub or ''
    return [name[len(stub):] if stub and name.startswith(stub) else name for name in names]


def load_selection(path: str) -> SelectionResult:
    doc = read_json(path)
    return SelectionResult.from_dict(doc.get('selection', doc))


def _load_shift_share(rc: RunConfig) -> ShiftShareInputs:
    _require(rc, 'shares', 'shifts')
    return load_shift_share(rc.shares, rc.shifts, delimiter=rc.delimiter)


def _document(rc: RunConfig, **body: Any) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        'schema_version': IO_CONFIG['schema_version'],
        'command': rc.command,
        'run_config': rc.to_dict(),
    }
    doc.update(body)
    return doc


def cmd_select(rc: RunConfig) -> Dict[str, Any]:
    """运行选择器并写出 SelectionResult"""
    d = load_run_dataset(rc)
    selector = SelectorFactory.create_selector(
        rc.method, test=rc.test, threshold=rc.siglevel, c=rc.c, vce=rc.vce, psif=rc.psif,
    )
    result = selector.select(d)
    doc = _document(rc, selection=result.to_dict())
    write_json(doc, rc.out)
    return doc


def cmd_estimate(rc: RunConfig) -> Dict[str, Any]:
    """按选择结果运行所请求的估计量

    没有 --selection 时全部份额视为有效。选择结果按列名映射回当前数据集。
    """
    d = load_run_dataset(rc)
    provenance: Optional[Dict[str, Any]] = None
    invalid: tuple = ()
    if rc.selection:
        selection = load_selection(rc.selection)
        invalid = d.indices_of(selection.invalid_names)
        provenance = {
            'file': rc.selection,
            'method': selection.method,
            'test': selection.test,
            'threshold': selection.threshold,
            'invalid_names': selection.invalid_names,
        }
    valid = d.complement(invalid)

    options: Dict[str, Any] = {'vce': rc.vce}
    if 'ssiv' in rc.estimators:
        _require(rc, 'location')
        options.update(shift_share=_load_shift_share(rc), location=rc.location,
                       period=rc.period, class_labels=class_labels(rc, d.z_names))

    results = []
    rows = []
    for name in rc.estimators:
        estimator = EstimatorFactory.create_estimator(name, **options)
        fit = estimator.fit(d, valid, invalid)
        results.append(fit.to_dict(d.z_names))
        for p, xname in enumerate(d.x_names):
            rows.append({'estimator': name, 'regressor': xname, 'beta': float(fit.beta[p]),
                         'se': float(fit.beta_se[p]), 'first_stage': fit.first_stage_F,
                         'n_invalid': fit.n_invalid, 'n': fit.n})

    table = pd.DataFrame(rows)
    logger.info(f"估计结果:\n{table.to_string(index=False)}")
    doc = _document(rc, selection=provenance, estimates=results,
                    table=table.to_dict(orient='records'))
    write_json(doc, rc.out)
    return doc


def cmd_ssiv(rc: RunConfig) -> Dict[str, Any]:
    """构造移位份额工具变量列，可只用选择结果中的有效类别"""
    ss = _load_shift_share(rc)
    if rc.selection:
        labels = class_labels(rc, load_selection(rc.selection).valid_names)
    else:
        labels = list(ss.classes)

    series = build_ssiv(ss, labels)
    frame = series.reset_index()
    frame.columns = [rc.location or 'location', rc.period or 'period', 'ssiv']
    write_csv(frame, rc.out, rc.to_dict())
    return {'rows': len(frame), 'classes': labels}


def cmd_simulate(rc: RunConfig) -> Dict[str, Any]:
    _require(rc, 'design')
    df = sweep(rc.design, reps=rc.reps, seed=rc.seed, vce=rc.vce, test=rc.test,
               n_jobs=rc.n_jobs, P=rc.P, show_progress=True, z_law=rc.z_law,
               n_grid=rc.n_grid or None)
    write_csv(df, rc.out, rc.to_dict())
    return {'rows': len(df)}


COMMANDS: Dict[str, Callable[[RunConfig], Dict[str, Any]]] = {
    'select': cmd_select,
    'estimate': cmd_estimate,
    'ssiv': cmd_ssiv,
    'simulate': cmd_simulate,
}


def run_command(rc: RunConfig) -> int:
    """执行命令，返回退出码

    领域错误写成 {'error': ...} JSON 输出到标准输出，并返回 1。
    """
    try:
        COMMANDS[rc.command](rc)
        return 0
    except ShiftShareError as e:
        logger.error(f"{rc.command} 失败: {e}")
        write_json(_document(rc, error=e.to_dict()), None)
        return 1
