#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import os
from typing import Any, Dict, List

from dotenv import load_dotenv

load_dotenv()


def _env_float(key: str, default: float) -> float:
    value = os.getenv(key)
    return float(value) if value not in (None, '') else default


def _env_int(key: str, default: int) -> int:
    value = os.getenv(key)
    return int(value) if value not in (None, '') else default


LOG_CONFIG: Dict[str, str] = {
    'level': os.getenv('SSIV_LOG_LEVEL', 'INFO'),
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'file': os.getenv('SSIV_LOG_FILE', 'ssiv_select.log')
}

ESTIMATION_CONFIG: Dict[str, Any] = {
    'vce': os.getenv('SSIV_VCE', 'robust'),
    'c': _env_float('SSIV_C', 0.1),
    'psif': _env_float('SSIV_PSIF', 1.0),
    'combination_cap': _env_int('SSIV_COMBINATION_CAP', 200000),
    'alasso_exponent': _env_float('SSIV_ALASSO_EXPONENT', 1.0),
    'alpha_floor': 1e-12,
    'first_stage_cap': 1e12,
    # control: 其余工具变量作为外生控制变量; exclude: 完全剔除
    'just_identified_others': os.getenv('SSIV_JUST_IDENTIFIED_OTHERS', 'control'),
    'add_constant': os.getenv('SSIV_ADD_CONSTANT', '1') not in ('0', 'false', 'False')
}

SIMULATION_CONFIG: Dict[str, Any] = {
    'reps': _env_int('SSIV_REPS', 100),
    'seed': _env_int('SSIV_SEED', 20240601),
    'n_jobs': _env_int('SSIV_N_JOBS', 1),
    'vce': os.getenv('SSIV_SIM_VCE', 'homoskedastic'),
    # 多数/相对多数设计中份额的分布: uniform(0,0.1) 或 uniform(0,1)
    'z_law': os.getenv('SSIV_SIM_Z_LAW', 'uniform(0,0.1)'),
    'n_grid': list(range(400, 6001, 400)),
    'multi_n': 10000,
    'multi_J': 20,
    # 批量重复期间选择器和估计量记录器的级别
    'replicate_log_level': os.getenv('SSIV_REPLICATE_LOG_LEVEL', 'ERROR')
}

IO_CONFIG: Dict[str, str] = {
    'delimiter': ',',
    'encoding': 'utf-8',
    'schema_version': '1.0'
}

SUPPORTED_VCE: List[str] = ['homoskedastic', 'robust', 'cluster']
