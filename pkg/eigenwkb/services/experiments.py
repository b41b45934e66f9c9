from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
import logging

from eigenwkb.services import branch_geometry as bg
from eigenwkb.services.cache_manager import cache_manager
from eigenwkb.services.operator_core import (
    EigenPair, ExactlySolvableOperator, content_hash, eigenpoly, epsilon, resonant_degrees,
)
from eigenwkb.services.poly_core import derivative, evaluate, exact, get_context, roots, to_float, to_mp
from eigenwkb.services.scenarios import Scenario
from eigenwkb.utils.codec import operator_to_json

logger = logging.getLogger(__name__)


@dataclass
class ResultRow:
    scenario: str
    n: int
    z: Tuple[Any, Any]
    measured: Any = None
    predicted: Any = None
    rel_error: Any = None
    aux: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def sort_key(self):
        return (self.scenario, self.n, float(self.z[0]), float(self.z[1]), self.aux.get("j", 0))


@dataclass
class ExperimentResult:
    name: str
    rows: List[ResultRow]
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def max_rel_error(self) -> Optional[float]:
        values = [float(r.rel_error) for r in self.rows if r.error is None and r.rel_error is not None]
        return max(values) if values else None


def operator_key(op: ExactlySolvableOperator) -> str:
    return content_hash(operator_to_json(op))


def cached_eigenpair(op: ExactlySolvableOperator, n: int) -> EigenPair:
    return cache_manager.get_or_compute(("eigenpair", operator_key(op), n), lambda: eigenpoly(op, n))


def cached_context(op: ExactlySolvableOperator, bits: int) -> bg.BranchContext:
    return cache_manager.get_or_compute(("branch", operator_key(op), bits),
                                        lambda: bg.make_context(op, bits))


class ExperimentRunner:
    """Runs the asymptotic experiments of one scenario.

    Eigenpolynomials are solved exactly and only downcast when evaluated;
    Phi0/Phi1 are integrated once per evaluation point.
    """

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        self.bits = scenario.bits
        self.mp = get_context(self.bits)
        self.ctx = cached_context(scenario.op, self.bits)
        self._primitives: Dict[Tuple[Any, Any], Tuple[Any, Any]] = {}

    # --- helpers ---------------------------------------------------------

    def point(self, z: Tuple[Any, Any]):
        return to_mp(exact(z), self.mp)

    def primitives(self, z: Tuple[Any, Any]) -> Tuple[Any, Any]:
        if z not in self._primitives:
            zz = self.point(z)
            p0 = bg.phi0(zz, self.ctx)
            p1 = bg.phi1(zz, self.ctx)
            logger.debug("%s: primitives at %s (errors %s, %s)", self.sc.name, z,
                         self.mp.nstr(p0.error, 3), self.mp.nstr(p1.error, 3))
            self._primitives[z] = (p0.value, p1.value)
        return self._primitives[z]

    def Q(self, n: int, z: Tuple[Any, Any], j: int = 0):
        """Q_n^(j)(z) from the exact coefficients rounded at evaluation time."""
        Q = cached_eigenpair(self.sc.op, n).Q
        if j:
            Q = derivative(Q, j)
        return evaluate(to_float(Q, self.bits), self.point(z))

    def row(self, n: int, z: Tuple[Any, Any], measured, predicted, **aux) -> ResultRow:
        row = ResultRow(self.sc.name, n, z, measured, predicted, aux=aux)
        mp = self.mp
        try:
            if predicted == 0:
                rel = mp.mpf(0) if measured == 0 else mp.inf
            else:
                rel = abs(measured / predicted - 1)
        except (ZeroDivisionError, TypeError) as e:
            rel = mp.nan
            logger.debug("rel_error failed: %s", e)
        if not mp.isfinite(rel) or not mp.isfinite(measured) or not mp.isfinite(predicted):
            row.error = f"non-finite value (measured={mp.nstr(measured, 8)}, predicted={mp.nstr(predicted, 8)})"
            row.measured = row.predicted = row.rel_error = None
            logger.warning("%s n=%d z=%s: %s", self.sc.name, n, z, row.error)
            return row
        row.rel_error = rel
        return row

    def _degrees(self) -> List[int]:
        return list(self.sc.n_grid)

    # --- experiments -----------------------------------------------------

    def run_ratio_test(self) -> ExperimentResult:
        """Q_{n+1}(z)/Q_n(z) against exp(Phi0(z))."""
        rows = []
        degrees = self._degrees()
        blocked = set(resonant_degrees(self.sc.op, max(degrees) + 1)) if degrees else set()
        for z in self.sc.z_grid:
            predicted = self.mp.exp(self.primitives(z)[0])
            for n in degrees:
                if n + 1 not in blocked:
                    rows.append(self.row(n, z, self.Q(n + 1, z) / self.Q(n, z), predicted))
        return ExperimentResult("ratio", rows)

    def run_strong_asym(self) -> ExperimentResult:
        """Q_n(z) against the predictor exp((n - kappa) Phi0 + Phi1)."""
        rows = []
        for z in self.sc.z_grid:
            prims = self.primitives(z)
            for n in self._degrees():
                predicted = bg.predictor(n, self.point(z), self.ctx, prims)
                rows.append(self.row(n, z, self.Q(n, z), predicted))
        return ExperimentResult("strong", rows)

    def run_c1_extraction(self) -> ExperimentResult:
        """Estimates n (Q_n/predictor - 1) of the first correction term.

        Each row compares the estimate at a degree with the one at the
        previous degree of the grid; aux carries the absolute difference.
        """
        rows = []
        degrees = self._degrees()
        for z in self.sc.z_grid:
            prims = self.primitives(z)
            estimates = []
            for n in degrees:
                predicted = bg.predictor(n, self.point(z), self.ctx, prims)
                estimates.append((n, n * (self.Q(n, z) / predicted - 1)))
            for (prev_n, prev), (n, est) in zip(estimates, estimates[1:]):
                rows.append(self.row(n, z, est, prev, previous_n=prev_n, cauchy_diff=abs(est - prev)))
        return ExperimentResult("c1", rows)

    def run_cauchy_transform(self, max_j: int = 3) -> ExperimentResult:
        """Q_n'/(n Q_n) against w_1, and eps_n^j Q_n^(j)/Q_n against w_1^j."""
        rows = []
        for z in self.sc.z_grid:
            w1 = bg.w(1, self.point(z), self.ctx)
            for n in self._degrees():
                if n == 0:
                    continue
                Qn = self.Q(n, z)
                rows.append(self.row(n, z, self.Q(n, z, 1) / (n * Qn), w1, j=1, scaling="n"))
                eps = epsilon(self.sc.op, n, self.bits)
                for j in range(0, max_j + 1):
                    if j == 1:
                        continue
                    measured = eps ** j * self.Q(n, z, j) / Qn
                    rows.append(self.row(n, z, measured, w1 ** j, j=j, scaling="epsilon"))
        result = ExperimentResult("cauchy", rows)
        for j in range(max_j + 1):
            values = [float(r.rel_error) for r in rows if r.aux.get("j") == j and r.error is None]
            result.summary[f"max_rel_error_j{j}"] = max(values) if values else None
        return result

    def run_zero_map(self) -> ExperimentResult:
        """Zeros of Q_n for the largest degree: distance to the hull and the
        first moments of the zero counting measure."""
        n = max(self._degrees())
        Q = to_float(cached_eigenpair(self.sc.op, n).Q, self.bits)
        zeros = roots(Q) if n > 0 else []
        hull = self.ctx.hull
        rows = []
        for r in zeros:
            c = complex(r)
            nearest = hull.project(c)
            row = ResultRow(self.sc.name, n, (r.real, r.imag), r, self.mp.mpc(nearest),
                            rel_error=self.mp.mpf(abs(c - nearest)))
            rows.append(row)
        samples = hull.boundary_samples()
        one_sided = max((float(row.rel_error) for row in rows), default=0.0)
        reverse = max(min(abs(s - complex(r)) for r in zeros) for s in samples) if zeros else 0.0
        moments = {}
        for k in range(1, 5 if zeros else 1):
            m = sum((r ** k for r in zeros), self.mp.mpc(0)) / len(zeros)
            moments[f"m{k}"] = [self.mp.nstr(m.real, 15), self.mp.nstr(m.imag, 15)]
        summary = {
            "n": n,
            "zero_count": len(zeros),
            "max_hull_distance": one_sided,
            "hausdorff_to_hull": max(one_sided, reverse),
            "moments": moments,
        }
        logger.info("%s: %d zeros of Q_%d, max hull distance %.3g", self.sc.name, len(zeros), n, one_sided)
        return ExperimentResult("zeros", rows, summary)

    def run_nth_root(self) -> ExperimentResult:
        """|Q_n(z)|^(1/n) against |exp(Phi0(z))|."""
        rows = []
        for z in self.sc.z_grid:
            predicted = abs(self.mp.exp(self.primitives(z)[0]))
            for n in self._degrees():
                if n == 0:
                    continue
                rows.append(self.row(n, z, abs(self.Q(n, z)) ** (self.mp.mpf(1) / n), predicted))
        return ExperimentResult("nth_root", rows)

    def run(self, name: str) -> ExperimentResult:
        runners = {
            "ratio": self.run_ratio_test,
            "strong": self.run_strong_asym,
            "c1": self.run_c1_extraction,
            "cauchy": self.run_cauchy_transform,
            "zeros": self.run_zero_map,
            "nth_root": self.run_nth_root,
        }
        if name not in runners:
            raise ValueError(f"unknown experiment '{name}'")
        if not self.sc.n_grid:
            return ExperimentResult(name, [])
        logger.info("%s: running %s", self.sc.name, name)
        return runners[name]()
