#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""移位份额 IV 无效份额选择工具主程序

使用方法:
    python main.py select   --data d.csv --y y --x x --z-stub z --method alasso
    python main.py estimate --data d.csv --y y --x x --z-stub z --selection sel.json --estimators tsls liml
    python main.py ssiv     --shares shares.csv --shifts shifts.csv --selection sel.json
    python main.py simulate --design majority --reps 100 --out majority.csv
"""

import argparse
import logging
import sys
from typing import List, Optional

from cli.commands import run_command
from cli.run_config import RunConfig
from core.types import DgpConfig
from estimators.factory import EstimatorFactory
from selection.factory import SelectorFactory
from selection.overid import SUPPORTED_TESTS
from simulation.harness import DESIGN_ALIASES, SUPPORTED_DESIGNS
from utils import ShiftShareError, setup_logger
from utils.io import write_json

logger = logging.getLogger(__name__)


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('数据')
    group.add_argument('--data', help='数据文件（带表头的分隔文本）')
    group.add_argument('--tab', action='store_true', help='数据以制表符分隔')
    group.add_argument('--y', help='结果变量列')
    group.add_argument('--x', action='append', help='内生处理变量列，可重复给出')
    group.add_argument('--z-stub', dest='z_stub', help='份额列名前缀')
    group.add_argument('--z-list', dest='z_list', nargs='+', help='份额列名列表')
    group.add_argument('--controls', nargs='+', help='外生控制变量列')
    group.add_argument('--weights', help='分析权重列')
    group.add_argument('--cluster', help='聚类标识列')
    group.add_argument('--no-constant', dest='no_constant', action='store_true',
                       help='不在控制变量中加入截距')
    group.add_argument('--demean-by', dest='demean_by', help='按该列分组去均值')


def _add_shift_share_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('移位份额')
    group.add_argument('--shares', help='份额长表 (location, class, share)')
    group.add_argument('--shifts', help='冲击长表 (class, period, shift)')
    group.add_argument('--location', help='数据中的地区标识列')
    group.add_argument('--period', help='数据中的时期标识列')


def _add_selection_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('选择')
    group.add_argument('--method', default='alasso', choices=SelectorFactory.get_supported_types())
    group.add_argument('--test', default='hs', choices=list(SUPPORTED_TESTS))
    group.add_argument('--c', type=float, help='显著性水平常数，水平为 c/ln(n)，缺省 0.1')
    group.add_argument('--siglevel', type=float, help='固定显著性水平，覆盖 c/ln(n)')
    group.add_argument('--psif', type=float, help='CIM 初始临界值系数，缺省 1')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ssiv-select',
        description='移位份额工具变量的无效份额选择、选择后估计与蒙特卡洛实验',
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--vce', help='homoskedastic, robust 或 cluster:<列名>')
    common.add_argument('--out', help='输出文件，缺省写到标准输出')
    common.add_argument('--seed', type=int, help='随机种子')
    common.add_argument('--log-level', dest='log_level', help='日志级别')
    sub = parser.add_subparsers(dest='command', required=True)

    select = sub.add_parser('select', parents=[common], help='选择无效份额')
    _add_data_options(select)
    _add_selection_options(select)

    estimate = sub.add_parser('estimate', parents=[common], help='按选择结果估计')
    _add_data_options(estimate)
    _add_selection_options(estimate)
    _add_shift_share_options(estimate)
    estimate.add_argument('--selection', help='select 命令输出的 JSON')
    estimate.add_argument('--estimators', nargs='+', default=['tsls'],
                          choices=EstimatorFactory.get_supported_types())

    ssiv = sub.add_parser('ssiv', parents=[common], help='构造移位份额工具变量')
    _add_selection_options(ssiv)
    _add_shift_share_options(ssiv)
    ssiv.add_argument('--z-stub', dest='z_stub', help='选择结果中份额列名的前缀')
    ssiv.add_argument('--selection', help='select 命令输出的 JSON')
    ssiv.add_argument('--tab', action='store_true', help='输入以制表符分隔')

    simulate = sub.add_parser('simulate', parents=[common], help='蒙特卡洛实验')
    _add_selection_options(simulate)
    simulate.add_argument('--design', required=True,
                          choices=list(SUPPORTED_DESIGNS) + list(DESIGN_ALIASES))
    simulate.add_argument('--reps', type=int, help='每个参数组合的重复次数')
    simulate.add_argument('--P', type=int, choices=[1, 2, 3], help='多内生变量设计的 P')
    simulate.add_argument('--n-jobs', dest='n_jobs', type=int, help='并行进程数')
    simulate.add_argument('--z-law', dest='z_law', choices=list(DgpConfig.Z_LAWS),
                          help='多数/相对多数设计中份额的分布，缺省 uniform(0,0.1)')
    simulate.add_argument('--n-grid', dest='n_grid', type=int, nargs='+',
                          help='样本量网格，缺省 400..6000 步长 400')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数

    Returns:
        int: 程序退出码
    """
    args = build_parser().parse_args(argv)
    setup_logger(log_level=args.log_level)
    logger.info(f"=== ssiv-select {args.command} ===")

    try:
        rc = RunConfig.from_args(args)
    except ShiftShareError as e:
        logger.error(f"参数错误: {e}")
        write_json({'command': args.command, 'error': e.to_dict()}, None)
        return 2

    try:
        return run_command(rc)
    except KeyboardInterrupt:
        logger.info("用户中断程序执行")
        return 1


if __name__ == '__main__':
    sys.exit(main())
