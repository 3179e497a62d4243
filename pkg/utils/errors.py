"""异常定义模块

所有面向用户的错误都继承自 ShiftShareError，命令行入口据此输出结构化错误。
输入类错误同时继承 ValueError，数值类错误同时继承 RuntimeError。
"""

from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple


class ShiftShareError(Exception):
    """所有领域错误的基类"""

    def details(self) -> Dict[str, Any]:
        """返回可序列化的错误细节，子类按需扩展"""
        return {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'type': type(self).__name__,
            'message': str(self),
            'details': self.details(),
        }


class DataValidationError(ShiftShareError, ValueError):
    """数据维度、取值或结构不满足要求"""


class MissingColumnError(DataValidationError):
    def __init__(self, column: str, available: Optional[Sequence[str]] = None):
        self.column = column
        self.available = list(available) if available is not None else []
        super().__init__(f"数据中缺少列: {column}")

    def details(self) -> Dict[str, Any]:
        return {'column': self.column, 'available': self.available}


class NonFiniteValueError(DataValidationError):
    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"第 {row + 1} 行数据的列 {column} 含有非有限值")

    def details(self) -> Dict[str, Any]:
        return {'row': self.row, 'column': self.column}


class RankDeficiencyError(DataValidationError):
    def __init__(self, index: int, name: str, what: str = '工具变量矩阵'):
        self.index = index
        self.name = name
        super().__init__(f"{what}列不满秩: 第 {index + 1} 列 ({name}) 与前面的列线性相关")

    def details(self) -> Dict[str, Any]:
        return {'index': self.index, 'name': self.name}


class PanelGapError(DataValidationError):
    def __init__(self, units: Iterable[Any]):
        self.units = [str(u) for u in units]
        super().__init__(f"以下单位的时间序列存在缺口: {', '.join(self.units)}")

    def details(self) -> Dict[str, Any]:
        return {'units': self.units}


class MissingShiftError(DataValidationError):
    def __init__(self, cls: str, period: Any):
        self.cls = cls
        self.period = period
        super().__init__(f"冲击表中缺少 (类别={cls}, 时期={period}) 的取值")

    def details(self) -> Dict[str, Any]:
        return {'class': self.cls, 'period': str(self.period)}


class KeyMismatchError(DataValidationError):
    def __init__(self, unmatched: Iterable[Any], what: str = '键'):
        self.unmatched = [str(k) for k in unmatched]
        shown = ', '.join(self.unmatched[:20])
        more = f" 等共 {len(self.unmatched)} 个" if len(self.unmatched) > 20 else ''
        super().__init__(f"无法匹配的{what}: {shown}{more}")

    def details(self) -> Dict[str, Any]:
        return {'unmatched': self.unmatched}


class CombinationLimitError(ShiftShareError, ValueError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"恰好识别组合数 {count} 超过上限 {cap}")

    def details(self) -> Dict[str, Any]:
        return {'count': self.count, 'cap': self.cap}


class UnderidentifiedError(ShiftShareError, ValueError):
    def __init__(self, n_valid: int, n_endog: int):
        self.n_valid = n_valid
        self.n_endog = n_endog
        super().__init__(f"模型识别不足: 有效工具变量 {n_valid} 个，少于内生变量 {n_endog} 个")

    def details(self) -> Dict[str, Any]:
        return {'n_valid': self.n_valid, 'n_endog': self.n_endog}


class CollinearityError(ShiftShareError, ValueError):
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        super().__init__(f"第二阶段设计矩阵奇异，共线的列: {', '.join(self.columns)}")

    def details(self) -> Dict[str, Any]:
        return {'columns': self.columns}


class UndefinedTestError(ShiftShareError, ValueError):
    def __init__(self, n_valid: int, n_endog: int):
        self.n_valid = n_valid
        self.n_endog = n_endog
        super().__init__(
            f"过度识别检验无定义: 有效工具变量 {n_valid} 个，需多于内生变量 {n_endog} 个"
        )

    def details(self) -> Dict[str, Any]:
        return {'n_valid': self.n_valid, 'n_endog': self.n_endog}


class UnsupportedModelError(ShiftShareError, ValueError):
    """请求的方法不支持当前模型设定"""


class NumericalError(ShiftShareError, RuntimeError):
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)

    def details(self) -> Dict[str, Any]:
        return self.diagnostics


class SelectionExhaustedError(ShiftShareError, RuntimeError):
    """选择路径上没有任何模型通过检验

    path 保存已检验的步骤，便于调用方输出诊断信息。
    """

    def __init__(self, message: str, path: Optional[List[Any]] = None,
                 advice: Optional[Tuple[str, ...]] = None):
        self.path = list(path or [])
        self.advice = tuple(advice or ())
        super().__init__(message)

    def details(self) -> Dict[str, Any]:
        steps = [s.to_dict() if hasattr(s, 'to_dict') else s for s in self.path]
        return {'path': steps, 'advice': list(self.advice)}
