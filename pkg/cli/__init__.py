"""命令行前端"""

from .commands import COMMANDS, cmd_estimate, cmd_select, cmd_simulate, cmd_ssiv, run_command
from .run_config import RunConfig

__all__ = ['COMMANDS', 'cmd_estimate', 'cmd_select', 'cmd_simulate', 'cmd_ssiv', 'run_command',
           'RunConfig']
