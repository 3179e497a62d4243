"""命令行运行配置

把 argparse 结果和 config.py 中的默认值合并成一个 RunConfig，所有输出都嵌入它的完整内容。
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from config import ESTIMATION_CONFIG, IO_CONFIG, SIMULATION_CONFIG, SUPPORTED_VCE
from utils.errors import DataValidationError

logger = logging.getLogger(__name__)

SUPPORTED_COMMANDS = ('select', 'estimate', 'ssiv', 'simulate')


def parse_vce(value: Optional[str]) -> Tuple[Optional[str], Optional[str]]:
    """解析 vce 字符串，'cluster:<列名>' 拆成 ('cluster', 列名)"""
    if value is None:
        return None, None
    value = value.strip()
    if value.startswith('cluster:'):
        column = value.split(':', 1)[1].strip()
        if not column:
            raise DataValidationError("vce=cluster:<列名> 需要给出聚类列名")
        return 'cluster', column
    if value not in SUPPORTED_VCE:
        raise DataValidationError(
            f"不支持的协方差类型: {value}. 支持: {', '.join(SUPPORTED_VCE)}, cluster:<列名>"
        )
    return value, None


@dataclass
class RunConfig:
    command: str
    data: Optional[str] = None
    y: Optional[str] = None
    x: List[str] = field(default_factory=list)
    z_stub: Optional[str] = None
    z_list: List[str] = field(default_factory=list)
    controls: List[str] = field(default_factory=list)
    weights: Optional[str] = None
    cluster: Optional[str] = None
    method: str = 'alasso'
    test: str = 'hs'
    c: float = 0.1
    siglevel: Optional[float] = None
    psif: float = 1.0
    vce: Optional[str] = None
    estimators: List[str] = field(default_factory=lambda: ['tsls'])
    out: Optional[str] = None
    seed: Optional[int] = None
    design: Optional[str] = None
    reps: Optional[int] = None
    P: Optional[int] = None
    n_jobs: Optional[int] = None
    z_law: Optional[str] = None
    n_grid: List[int] = field(default_factory=list)
    selection: Optional[str] = None
    shares: Optional[str] = None
    shifts: Optional[str] = None
    location: Optional[str] = None
    period: Optional[str] = None
    delimiter: str = ','
    constant: bool = True
    demean_by: Optional[str] = None

    def __post_init__(self):
        if self.command not in SUPPORTED_COMMANDS:
            raise DataValidationError(
                f"不支持的命令: {self.command}. 支持: {', '.join(SUPPORTED_COMMANDS)}"
            )
        vce, column = parse_vce(self.vce)
        if column:
            if self.cluster and self.cluster != column:
                raise DataValidationError(f"--cluster {self.cluster} 与 vce 中的 {column} 不一致")
            self.cluster = column
        if vce == 'cluster' and not self.cluster:
            raise DataValidationError("vce=cluster 需要通过 cluster:<列名> 或 --cluster 指定聚类列")
        self.vce = vce
        if self.c <= 0:
            raise DataValidationError(f"常数 c 必须为正: {self.c}")
        if self.psif <= 0:
            raise DataValidationError(f"psif 必须为正: {self.psif}")
        if any(n <= 1 for n in self.n_grid):
            raise DataValidationError(f"样本量网格必须大于 1: {self.n_grid}")
        self.estimators = [e.lower().strip() for e in self.estimators]

    @classmethod
    def from_args(cls, args: Any) -> 'RunConfig':
        """由 argparse.Namespace 构造，未给出的选项取 config.py 中的缺省值"""
        simulate = args.command == 'simulate'
        vce = args.vce or (SIMULATION_CONFIG['vce'] if simulate else ESTIMATION_CONFIG['vce'])
        return cls(
            command=args.command,
            data=getattr(args, 'data', None),
            y=getattr(args, 'y', None),
            x=list(getattr(args, 'x', None) or []),
            z_stub=getattr(args, 'z_stub', None),
            z_list=list(getattr(args, 'z_list', None) or []),
            controls=list(getattr(args, 'controls', None) or []),
            weights=getattr(args, 'weights', None),
            cluster=getattr(args, 'cluster', None),
            method=args.method,
            test=args.test,
            c=ESTIMATION_CONFIG['c'] if args.c is None else args.c,
            siglevel=args.siglevel,
            psif=ESTIMATION_CONFIG['psif'] if args.psif is None else args.psif,
            vce=vce,
            estimators=list(getattr(args, 'estimators', None) or ['tsls']),
            out=args.out,
            seed=SIMULATION_CONFIG['seed'] if args.seed is None else args.seed,
            design=getattr(args, 'design', None),
            reps=getattr(args, 'reps', None) or SIMULATION_CONFIG['reps'],
            P=getattr(args, 'P', None),
            n_jobs=getattr(args, 'n_jobs', None) or SIMULATION_CONFIG['n_jobs'],
            z_law=(getattr(args, 'z_law', None)
                   or (SIMULATION_CONFIG['z_law'] if simulate else None)),
            n_grid=list(getattr(args, 'n_grid', None) or []),
            selection=getattr(args, 'selection', None),
            shares=getattr(args, 'shares', None),
            shifts=getattr(args, 'shifts', None),
            location=getattr(args, 'location', None),
            period=getattr(args, 'period', None),
            delimiter='\t' if getattr(args, 'tab', False) else IO_CONFIG['delimiter'],
            constant=not getattr(args, 'no_constant', False),
            demean_by=getattr(args, 'demean_by', None),
        )

    def to_dict(self) -> Dict[str, Any]:
        doc = asdict(self)
        doc['schema_version'] = IO_CONFIG['schema_version']
        return doc
