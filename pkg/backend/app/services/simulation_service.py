# -*- coding: utf-8 -*-
"""
シミュレーション実行サービス

実行設定 → シナリオ構築 → 右辺選択 → 積分 → 診断集計 → ファイル出力
"""

import time
from typing import Optional, Tuple

import numpy as np
import structlog

from app.core.config import settings
from app.core.exceptions import ConfigError, SimulationError
from app.models.dynamics import RightHandSide, State, Trajectory
from app.models.scenario import ScenarioSpec, SimulationMode
from app.schemas.run import DiagnosticStats, FinalState, ReconstructionSummary, RunConfig, RunSummary
from app.services.dynamics_service import DynamicsService
from app.services.export_service import ExportService
from app.services.homogeneous_service import HomogeneousService
from app.services.scenario_service import ScenarioService, scenario_service
from app.services.virtual_constraint_service import VirtualConstraintService

logger = structlog.get_logger(__name__)

CONSTRAINED_MODES = (SimulationMode.NONHOLONOMIC, SimulationMode.CLOSED_LOOP)


def relative_drift(values: np.ndarray) -> float:
    """max |E(t) − E(0)| / |E(0)|（E(0) = 0 なら絶対値）"""
    reference = abs(float(values[0]))
    deviation = float(np.max(np.abs(values - values[0])))
    return deviation / reference if reference > 0.0 else deviation


class SimulationService:
    """
    シミュレーション実行サービスクラス
    1回の実行を組み立てて結果サマリーを返す
    """

    def __init__(self, scenarios: ScenarioService = scenario_service):
        self.scenarios = scenarios

    def prepare(
        self, config: RunConfig
    ) -> Tuple[ScenarioSpec, DynamicsService, Optional[VirtualConstraintService], State]:
        """シナリオ・サービス・初期状態の構築"""
        spec = self.scenarios.build(config.scenario, config.parameters)
        if not spec.supports(config.mode):
            raise ConfigError("mode", f"'{config.mode.value}' is not supported by {spec.name}")
        homogeneous = HomogeneousService(spec.structure, spec.metric)
        dynamics = DynamicsService(spec.metric, homogeneous, spec.potential)
        constraints = VirtualConstraintService(spec, dynamics) if spec.constraint is not None else None
        initial = self.scenarios.initial_state(spec, config.initial)
        return spec, dynamics, constraints, initial

    def select_rhs(
        self,
        mode: SimulationMode,
        dynamics: DynamicsService,
        constraints: Optional[VirtualConstraintService],
        initial: State,
    ) -> RightHandSide:
        """モードに対応する右辺"""
        if mode is SimulationMode.GEODESIC:
            return dynamics.geodesic_rhs
        if mode is SimulationMode.MECHANICAL:
            return dynamics.mechanical_rhs
        if constraints is None:
            raise ConfigError("mode", f"'{mode.value}' requires a constraint")
        # 初期状態が 𝔡 上にあること（NotOnConstraint を送出）
        constraints.solve_control(initial)
        if mode is SimulationMode.NONHOLONOMIC:
            return constraints.nonholonomic_rhs()
        return constraints.closed_loop_rhs()

    def integrate(self, config: RunConfig) -> Tuple[ScenarioSpec, Trajectory, Optional[VirtualConstraintService]]:
        spec, dynamics, constraints, initial = self.prepare(config)
        rhs = self.select_rhs(config.mode, dynamics, constraints, initial)
        monitor = constraints.constraint_residuals if constraints is not None else None
        log = logger.bind(scenario=spec.name, mode=config.mode.value)
        try:
            trajectory = dynamics.simulate(rhs, initial, config.T, config.h, monitor)
        except SimulationError as e:
            log.error("シミュレーション失敗", error_code=e.error_code, message=e.message)
            raise
        return spec, trajectory, constraints

    def summarize(
        self,
        config: RunConfig,
        spec: ScenarioSpec,
        trajectory: Trajectory,
        constraints: Optional[VirtualConstraintService],
        wall_time: float = 0.0,
    ) -> RunSummary:
        """診断値の集計とバジェット判定"""
        samples = trajectory.samples
        series = {
            "energy": np.array([s.diagnostics.energy for s in samples]),
            "kinetic_energy": np.array([s.diagnostics.kinetic_energy for s in samples]),
            "vertical_residual": np.array([s.diagnostics.vertical_residual for s in samples]),
            "constraint_residual": np.array([s.diagnostics.max_constraint_residual for s in samples]),
            "orthonormality_defect": np.array([s.diagnostics.orthonormality_defect for s in samples]),
        }
        stats = {
            name: DiagnosticStats(max=float(np.max(values)), mean=float(np.mean(values)))
            for name, values in series.items()
        }
        energy_drift = relative_drift(series["energy"])

        violations = []
        if config.mode in CONSTRAINED_MODES and stats["constraint_residual"].max > settings.constraint_budget:
            violations.append("constraint_residual")
        if stats["vertical_residual"].max > settings.vertical_budget:
            violations.append("vertical_residual")
        if config.mode is not SimulationMode.CLOSED_LOOP and energy_drift > settings.energy_drift_budget:
            violations.append("energy_drift")
        if stats["orthonormality_defect"].max > settings.orthonormality_budget:
            violations.append("orthonormality_defect")

        reconstruction = None
        if constraints is not None and config.mode in CONSTRAINED_MODES:
            report = constraints.reconstruction_check(trajectory)
            reconstruction = ReconstructionSummary(
                max_vertical_residual=report.max_vertical_residual,
                max_constraint_residual=report.max_constraint_residual,
            )

        final = trajectory.final
        return RunSummary(
            scenario=spec.name,
            mode=config.mode,
            steps=len(samples) - 1,
            scheme=trajectory.scheme,
            final_state=FinalState(
                t=final.t,
                xi=final.xi.coeffs.tolist(),
                g=final.g.flatten().tolist(),
                q=final.q.flatten().tolist(),
            ),
            diagnostics=stats,
            energy_drift=energy_drift,
            reconstruction=reconstruction,
            violations=violations,
            parameters=dict(spec.parameters),
            config=config,
            wall_time=wall_time,
        )

    def run(self, config: RunConfig, export: bool = True) -> Tuple[RunSummary, Trajectory]:
        """1回の実行（export=True なら結果ファイルも出力）"""
        started = time.perf_counter()
        spec, trajectory, constraints = self.integrate(config)
        summary = self.summarize(config, spec, trajectory, constraints, time.perf_counter() - started)
        if summary.violations:
            logger.warning("診断バジェット超過", scenario=spec.name, violations=summary.violations)
        if export:
            ExportService(config.output).export_run(trajectory, summary, config.formats)
        logger.info(
            "実行完了",
            scenario=spec.name,
            mode=config.mode.value,
            steps=summary.steps,
            wall_time=round(summary.wall_time, 3),
        )
        return summary, trajectory
