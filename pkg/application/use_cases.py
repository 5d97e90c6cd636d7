
"""
Use cases for the coarse-geometry laboratory, one per CLI subcommand.

Every use case returns a dictionary with the JSON report, a CSV table
(header and rows) and a pass flag for the acceptance check it represents.
"""
from typing import Any, Dict, Optional

from loguru import logger

from domain.coarse_calculus import (
    coarse_path,
    critical_heights,
    factor_distance_down,
    factor_distance_up,
    rho,
    rho_tilde,
)
from domain.entities import HeintzeModel, SolTypeModel
from domain.exceptions import ConfigurationError
from domain.group_arithmetic import normalize_metric
from domain.value_objects import Verdict
from infrastructure.evaluators import HyperbolicEvaluator, LatticeEvaluator, RhoEvaluator
from infrastructure.file_system_repository import BUCKET_HEADER, FileSystemReportRepository
from infrastructure.lattice_dijkstra import cumulative_length
from application.services import SimilarityService


def _echo(config) -> Dict[str, Any]:
    return config.model_dump(by_alias=True, exclude={"output", "format"})


class BaseUseCase:
    """
    Shared wiring: configuration, service and repository.
    """

    def __init__(self, config, service: Optional[SimilarityService] = None, repository=None):
        self.config = config
        self.service = service or SimilarityService(config.thresholds, config.workers)
        self.repository = repository or FileSystemReportRepository()

    def _result(self, report: Dict[str, Any], passed: bool, header, rows) -> Dict[str, Any]:
        report["config"] = _echo(self.config)
        report["seed"] = self.config.seed
        report["passed"] = passed
        return {"report": report, "passed": passed, "header": list(header), "rows": rows}


class DistanceUseCase(BaseUseCase):
    """
    Lattice distance between the configured points, optionally refined.
    """

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        model, metric = cfg.model.build(), cfg.model.metric()
        p, q = cfg.point("p"), cfg.point("q")
        logger.info(f"Starting use case: Distance on {model}")
        evaluator = LatticeEvaluator(model, metric, cfg.grid_h, cfg.margin, refine=cfg.refine)
        estimate = evaluator.evaluate(p, q)
        report = {
            "model": str(model),
            "p": p.to_list(),
            "q": q.to_list(),
            "estimate": estimate.to_dict(),
            "rho_tilde": rho_tilde(model, p, q, normalize_metric(model, metric)),
        }
        if isinstance(model, HeintzeModel) and model.k == 1:
            report["closed_form"] = HyperbolicEvaluator(model, metric).evaluate(p, q).value
        header, rows = self.repository.path_rows(
            estimate.path, cumulative_length(model, metric, estimate.path)
        )
        return self._result(report, True, header, rows)


class RhoUseCase(BaseUseCase):
    """
    ρ, ρ̃, critical heights and factor distances for the configured points.
    """

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        model, metric = cfg.model.build(), cfg.model.metric()
        if not isinstance(model, SolTypeModel):
            raise ConfigurationError("rho needs a soltype model")
        p, q = cfg.point("p"), cfg.point("q")
        normalized = normalize_metric(model, metric)
        t_up, t_down = critical_heights(model, p, q, normalized)
        report = {
            "model": str(model),
            "p": p.to_list(),
            "q": q.to_list(),
            "t_up": t_up,
            "t_down": t_down,
            "rho_tilde": rho_tilde(model, p, q, normalized),
        }
        if model.k_up == 1 and model.k_down == 1:
            report["d_up"] = factor_distance_up(model, metric, p, q)
            report["d_down"] = factor_distance_down(model, metric, p, q)
            report["rho"] = rho(model, p, q, metric)
        else:
            report["rho"] = RhoEvaluator(model, metric, cfg.grid_h, cfg.margin).evaluate(p, q).value
        header = ["quantity", "value"]
        rows = [(k, v) for k, v in sorted(report.items()) if isinstance(v, float)]
        return self._result(report, True, header, rows)


class CoarsePathUseCase(BaseUseCase):
    """
    Three-coset coarse path and its gap to ρ̃.
    """

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        model, metric = cfg.model.build(), cfg.model.metric()
        p, q = cfg.point("p"), cfg.point("q")
        path = coarse_path(model, p, q, metric)
        approx = rho_tilde(model, p, q, normalize_metric(model, metric))
        gap = abs(path.length - approx)
        report = {"model": str(model), "path": path.to_dict(), "rho_tilde": approx, "gap": gap}
        header = [f"n{i + 1}" for i in range(model.dim - 1)] + ["t", "segment_length"]
        lengths = (0.0,) + path.segment_lengths
        rows = [w.to_list() + [length] for w, length in zip(path.waypoints, lengths)]
        return self._result(report, gap <= 2.0 + 1e-9, header, rows)


# Heights τ at which the perpendicular section is measured against |τ|
SECTION_HEIGHTS = (-4.0, -2.0, -1.0, 1.0, 2.0, 4.0)


class VerifySolUseCase(BaseUseCase):
    """
    Lattice distance against ρ on a Sol-type model, with the coarse-path,
    hyperbolic coarse-distance, factor projection and section checks.
    """

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        model, metric = cfg.model.build(), cfg.model.metric()
        if not isinstance(model, SolTypeModel):
            raise ConfigurationError("verify-sol needs a soltype model")
        logger.info(f"Starting use case: VerifySol on {model}")
        similarity = self.service.rho_experiment(
            model, metric, cfg.grid_h, cfg.samples, cfg.seed, cfg.separation_scale,
            cfg.control_pairs, cfg.margin,
        )
        coarse = {"violations": 0, "skipped": "coarse paths need an orthogonal metric"}
        if metric.is_diagonal():
            coarse = self.service.coarse_path_check(model, max(cfg.samples, 1), cfg.seed, cfg.separation_scale, metric)
        projection_pairs = self.service.sample_pairs(
            model, cfg.control_pairs, cfg.seed + 2, min(cfg.separation_scale, 8.0), metric
        )
        projection = self.service.projection_check(model, projection_pairs, cfg.grid_h, metric)
        report = {
            "similarity": similarity.to_dict(),
            "coarse_path": coarse,
            "hyperbolic_coarse": self.service.hyperbolic_coarse_check(max(cfg.samples, 1), cfg.seed, cfg.separation_scale),
            "projection": projection,
            "section": self.service.section_check(model, metric, SECTION_HEIGHTS, cfg.grid_h),
        }
        passed = (
            similarity.verdict in (Verdict.ROUGH_ISOMETRY, Verdict.ROUGH_SIMILARITY)
            and coarse["violations"] == 0
            and projection["violations"] == 0
        )
        return self._result(report, passed, BUCKET_HEADER, self.repository.buckets_to_rows(similarity.buckets))


class VerifyMetricsUseCase(BaseUseCase):
    """
    Two frame metrics on one model compared through the identity map.
    """

    def __init__(self, config, kind: str, **kwargs):
        super().__init__(config, **kwargs)
        self.kind = kind

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        model, metric_1, metric_2 = cfg.model.build(), cfg.model.metric(), cfg.second()
        logger.info(f"Starting use case: Verify {self.kind} on {model}")
        experiment = self.service.theorem_a_experiment if self.kind == "heintze" else self.service.theorem_b_experiment
        similarity = experiment(
            model, metric_1, metric_2, cfg.grid_h, cfg.samples, cfg.seed, cfg.separation_scale,
            control_pairs=cfg.control_pairs, normalize=cfg.normalize, margin=cfg.margin,
        )
        report = {"similarity": similarity.to_dict()}
        if self.kind == "heintze" and isinstance(model, HeintzeModel) and model.k == 1:
            heights = [float(t) for t in range(-10, 11)]
            report["coset_shadow"] = self.service.coset_shadow_check(model, metric_1, metric_2, heights)
        if self.kind == "heintze":
            report["section"] = {
                "metric_1": self.service.section_check(model, metric_1, SECTION_HEIGHTS, cfg.grid_h),
                "metric_2": self.service.section_check(model, metric_2, SECTION_HEIGHTS, cfg.grid_h),
            }
        expected = (Verdict.ROUGH_ISOMETRY,) if cfg.normalize else (Verdict.ROUGH_ISOMETRY, Verdict.ROUGH_SIMILARITY)
        passed = similarity.verdict in expected
        return self._result(report, passed, BUCKET_HEADER, self.repository.buckets_to_rows(similarity.buckets))


TABLE_HEADER = ("n", "dw_conjugate", "da_conjugate", "dw_staircase", "da_staircase", "matches_closed_form")


class LamplighterTableUseCase(BaseUseCase):
    """
    Word lengths of both families in both generating sets.
    """

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        rows = self.service.section6_table(cfg.m, cfg.n_max)
        report = {"m": cfg.m, "n_max": cfg.n_max, "rows": rows}
        passed = all(r["matches_closed_form"] for r in rows)
        return self._result(report, passed, TABLE_HEADER, [[r[k] for k in TABLE_HEADER] for r in rows])


class LamplighterCertificateUseCase(BaseUseCase):
    """
    Exact ratio gap between the two families and the compare verdict.
    """

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        certificate = self.service.non_similarity_certificate(cfg.m, cfg.n_max)
        passed = certificate["certificate_valid"]
        if cfg.n_max >= 4:
            passed = passed and certificate["verdict"] == Verdict.NOT_ROUGHLY_SIMILAR.value
        rows = [[r[k] for k in TABLE_HEADER] for r in certificate["table"]]
        return self._result(certificate, passed, TABLE_HEADER, rows)


HOROBALL_HEADER = ("d", "horocycle_length", "constrained_length", "relative_error",
                   "exponential_bound", "depth", "exceeds_bound", "outside_bound_holds")


class HoroballUseCase(BaseUseCase):
    """
    Constrained shortest paths around a horoball in the hyperbolic plane.
    """

    def execute(self) -> Dict[str, Any]:
        cfg = self.config
        rows = self.service.horoball_experiment(cfg.horoball_distances, cfg.grid_h, cfg.margin)
        passed = all(
            r["exceeds_bound"] and r["outside_bound_holds"] and r["relative_error"] <= 0.03
            for r in rows
        )
        report = {"rows": rows}
        return self._result(report, passed, HOROBALL_HEADER, [[r[k] for k in HOROBALL_HEADER] for r in rows])
