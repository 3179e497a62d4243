import logging
from typing import Any, List

from .base import BaseIVEstimator
from .liml import LimitedInformationML
from .ssiv import ShiftShareIV
from .tsls import TwoStageLeastSquares

logger = logging.getLogger(__name__)


class EstimatorFactory:
    """估计量工厂类

    根据估计量名称创建相应的估计量实例。
    """

    SUPPORTED_TYPES = ('tsls', 'liml', 'ssiv')

    @staticmethod
    def create_estimator(estimator: str, **options: Any) -> BaseIVEstimator:
        """创建估计量

        Args:
            estimator: 估计量名称 ('tsls', 'liml', 'ssiv')
            **options: 传给估计量构造函数的参数，ssiv 需要 shift_share

        Returns:
            BaseIVEstimator: 估计量实例

        Raises:
            ValueError: 不支持的估计量时抛出
        """
        estimator = estimator.lower().strip()

        if estimator not in EstimatorFactory.SUPPORTED_TYPES:
            raise ValueError(
                f"不支持的估计量: {estimator}. "
                f"支持的估计量: {', '.join(EstimatorFactory.SUPPORTED_TYPES)}"
            )

        logger.debug(f"创建 {estimator} 估计量")
        if estimator == 'tsls':
            return TwoStageLeastSquares(options.get('vce'))
        if estimator == 'liml':
            return LimitedInformationML(options.get('vce'))
        if 'shift_share' not in options:
            raise ValueError("ssiv 估计量需要 shift_share 参数")
        return ShiftShareIV(**options)

    @staticmethod
    def get_supported_types() -> List[str]:
        return list(EstimatorFactory.SUPPORTED_TYPES)

    @staticmethod
    def is_supported_type(estimator: str) -> bool:
        return estimator.lower().strip() in EstimatorFactory.SUPPORTED_TYPES
