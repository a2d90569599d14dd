# -*- coding: utf-8 -*-
"""
pytest設定ファイル

シード固定の乱数と各シナリオのサービス一式を提供
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), "../backend"))

from app.services.dynamics_service import DynamicsService
from app.services.homogeneous_service import HomogeneousService
from app.services.scenario_service import build_blade_on_sphere, build_se3_r3, build_sphere_on_sphere
from app.services.virtual_constraint_service import VirtualConstraintService


class ScenarioServices:
    """シナリオと関連サービスの束"""

    def __init__(self, spec):
        self.spec = spec
        self.homogeneous = HomogeneousService(spec.structure, spec.metric)
        self.connections = self.homogeneous.connections
        self.dynamics = DynamicsService(spec.metric, self.homogeneous, spec.potential)
        self.constraints = VirtualConstraintService(spec, self.dynamics) if spec.constraint is not None else None


@pytest.fixture
def rng():
    """シード固定の乱数生成器"""
    return np.random.default_rng(20240601)


@pytest.fixture
def se3():
    """ℝ³ ≅ SE(3)/SO(3)（ポテンシャルなし）"""
    return ScenarioServices(build_se3_r3())


@pytest.fixture
def se3_spring():
    """ℝ³ ≅ SE(3)/SO(3)（k = 2 の調和ポテンシャル）"""
    return ScenarioServices(build_se3_r3(k=2.0))


@pytest.fixture
def sphere():
    """球面上を転がる球（J = (1, 2, 3)）"""
    return ScenarioServices(build_sphere_on_sphere())


@pytest.fixture
def blade():
    """球面上のナイフエッジ"""
    return ScenarioServices(build_blade_on_sphere())
