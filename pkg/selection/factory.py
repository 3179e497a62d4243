import logging
from typing import Any, List

from .alasso import AdaptiveLassoSelector
from .base import BaseSelector
from .cim import CimSelector

logger = logging.getLogger(__name__)


class SelectorFactory:
    """选择器工厂类

    根据方法名称创建无效份额选择器实例。
    """

    SUPPORTED_TYPES = ('alasso', 'cim')

    @staticmethod
    def create_selector(method: str, **options: Any) -> BaseSelector:
        """创建选择器

        Args:
            method: 选择方法 ('alasso', 'cim')
            **options: test, threshold, c, vce 以及方法特有参数
                (alasso: exponent, alpha_floor; cim: psif)

        Returns:
            BaseSelector: 选择器实例

        Raises:
            ValueError: 不支持的方法时抛出
        """
        method = method.lower().strip()

        if method not in SelectorFactory.SUPPORTED_TYPES:
            raise ValueError(
                f"不支持的选择方法: {method}. "
                f"支持的方法: {', '.join(SelectorFactory.SUPPORTED_TYPES)}"
            )

        logger.debug(f"创建 {method} 选择器")
        if method == 'alasso':
            options.pop('psif', None)
            return AdaptiveLassoSelector(**options)
        options.pop('exponent', None)
        options.pop('alpha_floor', None)
        return CimSelector(**options)

    @staticmethod
    def get_supported_types() -> List[str]:
        return list(SelectorFactory.SUPPORTED_TYPES)

    @staticmethod
    def is_supported_type(method: str) -> bool:
        return method.lower().strip() in SelectorFactory.SUPPORTED_TYPES
