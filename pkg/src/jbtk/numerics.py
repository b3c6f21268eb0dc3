"""Complex-matrix models of Cartan factors and floating-point checks.

Factors of type I to IV are realized as subspaces of rectangular matrices
with the triple product ``{a, b, c} = (a b* c + c b* a) / 2``.  Spin factors
use Clifford generators of size ``2**(n // 2)`` built from Pauli matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import sympy

from .factors import CartanFactor, Kind, minus_triple
from .morphisms import MorphismClass, check_morphism, standard_form

__all__ = [
    "ConcreteTriple",
    "NumericsError",
    "PreconditionFailed",
    "triple_product",
    "realize_factor",
    "clifford_generators",
    "realize_standard_morphism",
    "verify_morphism",
    "tripotent_approx",
    "delta_oracle",
    "odd_antisymmetric_singular",
    "spin_checks",
    "tripotent_span_check",
    "matrix_from_json",
    "matrix_to_json",
]

DEFAULT_TOL = 1e-10

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


class NumericsError(ValueError):
    pass


class PreconditionFailed(NumericsError):
    def __init__(self, message: str, measured: dict):
        super().__init__(message)
        self.measured = measured


def triple_product(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    bs = b.conj().T
    return (a @ bs @ c + c @ bs @ a) / 2


def opnorm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _kron(mats):
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


def clifford_generators(n: int) -> list[np.ndarray]:
    """Anticommuting self-adjoint unitaries ``s_1..s_n`` of size ``2**(n // 2)``.

    Jordan-Wigner layout: ``Z ⊗ .. ⊗ Z ⊗ X ⊗ 1 ⊗ ..`` and the same with ``Y``;
    for odd ``n`` the last generator is ``Z ⊗ .. ⊗ Z``.
    """
    if n < 1:
        raise NumericsError("need n >= 1")
    k = n // 2
    gens = []
    for j in range(k):
        for P in (_X, _Y):
            gens.append(_kron([_Z] * j + [P] + [_I2] * (k - j - 1)))
    if n % 2:
        gens.append(_kron([_Z] * k))
    return gens


@dataclass
class ConcreteTriple:
    """Matrix model of one Cartan factor.

    ``membership`` is ``'full'``, ``'symmetric'``, ``'antisymmetric'`` or
    ``'spinSpan'`` (complex span of ``generators``).
    """

    factor: CartanFactor
    shape: tuple[int, int]
    membership: str
    generators: list[np.ndarray] = field(default_factory=list, repr=False)
    tolerance: float = DEFAULT_TOL

    @property
    def dimension(self) -> int:
        r, c = self.shape
        return {
            "full": r * c,
            "symmetric": r * (r + 1) // 2,
            "antisymmetric": r * (r - 1) // 2,
            "spinSpan": len(self.generators),
        }[self.membership]

    def project(self, x: np.ndarray) -> np.ndarray:
        if self.membership == "symmetric":
            return (x + x.T) / 2
        if self.membership == "antisymmetric":
            return (x - x.T) / 2
        if self.membership == "spinSpan":
            return self.from_coords(self.coords(x))
        return x

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Spin coordinates: ``tr(s_i x) / size`` since ``tr(s_i s_j) = size δ_ij``."""
        size = self.shape[0]
        return np.array([np.trace(s @ x) / size for s in self.generators])

    def from_coords(self, c) -> np.ndarray:
        return sum(ci * s for ci, s in zip(c, self.generators))

    def is_member(self, x: np.ndarray, tol: float | None = None) -> bool:
        tol = self.tolerance if tol is None else tol
        if x.shape != self.shape:
            return False
        return float(np.linalg.norm(x - self.project(x))) <= tol * max(1.0, float(np.linalg.norm(x)))

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        if self.membership == "spinSpan":
            c = rng.standard_normal(len(self.generators)) + 1j * rng.standard_normal(len(self.generators))
            return self.from_coords(c)
        x = rng.standard_normal(self.shape) + 1j * rng.standard_normal(self.shape)
        return self.project(x)


def realize_factor(f: CartanFactor, tolerance: float = DEFAULT_TOL) -> ConcreteTriple:
    """Concrete matrix model of ``f`` (exceptional factors have none)."""
    kind, p = f.kind, f.params
    if kind is Kind.I:
        return ConcreteTriple(f, (p[0], p[1]), "full", tolerance=tolerance)
    if kind is Kind.II:
        return ConcreteTriple(f, (p[0], p[0]), "antisymmetric", tolerance=tolerance)
    if kind is Kind.III:
        return ConcreteTriple(f, (p[0], p[0]), "symmetric", tolerance=tolerance)
    if kind is Kind.IV:
        gens = clifford_generators(p[0])
        size = gens[0].shape[0]
        return ConcreteTriple(f, (size, size), "spinSpan", gens, tolerance)
    raise NumericsError(f"no matrix model for exceptional factor {f}")


# -- standard-form morphisms --------------------------------------------------


def _diag(blocks: list[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def _block_image(sb, a: np.ndarray) -> np.ndarray:
    if sb.cls == "A":
        return _diag([a] * sb.k + [a.T] * sb.l)
    x = _diag([a] * sb.k)
    out = np.zeros((sb.rows, sb.cols), dtype=complex)
    r, c = x.shape
    out[:r, sb.cols - c :] = x
    out[r:, : sb.cols - c] = sb.eps * x.T
    return out


def realize_standard_morphism(m: MorphismClass):
    """Linear map on element lists given by the standard form of ``m``.

    The returned callable takes one matrix per source summand and returns one
    per target summand.
    """
    check_morphism(m)
    layout = standard_form(m)
    targets = [realize_factor(f) for f in m.target]

    def phi(xs):
        if len(xs) != len(m.source):
            raise NumericsError(f"expected {len(m.source)} source blocks, got {len(xs)}")
        out = [np.zeros(t.shape, dtype=complex) for t in targets]
        for sb in layout:
            img = _block_image(sb, np.asarray(xs[sb.source], dtype=complex))
            out[sb.target][sb.row : sb.row + sb.rows, sb.col : sb.col + sb.cols] += img
        return out

    return phi


def verify_morphism(
    phi,
    src: list[ConcreteTriple],
    tgt: list[ConcreteTriple],
    samples: int = 50,
    seed: int = 0,
    tolerance: float = DEFAULT_TOL,
) -> dict:
    """Largest relative defect of ``phi{x,y,z}`` against ``{φx,φy,φz}``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    member = True
    for _ in range(samples):
        x, y, z = ([t.random_element(rng) for t in src] for _ in range(3))
        lhs = phi([triple_product(a, b, c) for a, b, c in zip(x, y, z)])
        px, py, pz = phi(x), phi(y), phi(z)
        if len(lhs) != len(tgt) or any(a.shape != t.shape for a, t in zip(lhs, tgt)):
            raise NumericsError("map output does not match the target shapes")
        for a, b, c, l, t in zip(px, py, pz, lhs, tgt):
            rhs = triple_product(a, b, c)
            scale = max(1.0, float(np.linalg.norm(rhs)))
            worst = max(worst, float(np.linalg.norm(l - rhs)) / scale)
            member = member and t.is_member(a, 1e-9)
    return {
        "samples": samples,
        "seed": seed,
        "maxResidual": worst,
        "tolerance": tolerance,
        "membership": member,
        "pass": bool(worst <= tolerance and member),
    }


# -- tripotents ----------------------------------------------------------------


def tripotent_approx(z: np.ndarray, eps: float, triple: ConcreteTriple, tolerance: float = DEFAULT_TOL):
    """Nearest-tripotent construction by spectral thresholding.

    Singular values of ``z`` at least 1/2 are sent to 1 and the rest to 0,
    i.e. ``e = z · h(z* z)`` for an odd spectral function, so ``e`` stays in
    the subtriple generated by ``z``.  Returns ``(e, report)``.
    """
    z = np.asarray(z, dtype=complex)
    norm = opnorm(z)
    defect = opnorm(triple_product(z, z, z) - z)
    measured = {"norm": norm, "defect": defect, "eps": eps}
    if not triple.is_member(z, 1e-8):
        raise PreconditionFailed("element is not in the factor", measured)
    if not eps <= 0.25:
        raise PreconditionFailed(f"eps={eps} exceeds 1/4", measured)
    if not norm < 1:
        raise PreconditionFailed(f"‖z‖={norm:.6g} is not < 1", measured)
    if not defect < eps:
        raise PreconditionFailed(f"‖{{z,z,z}}-z‖={defect:.6g} is not < eps={eps}", measured)
    u, s, vh = np.linalg.svd(z)
    keep = (s >= 0.5).astype(float)
    e = (u[:, : len(s)] * keep) @ vh[: len(s), :]
    e = triple.project(e)
    residual = opnorm(triple_product(e, e, e) - e)
    distance = opnorm(e - z)
    report = {
        **measured,
        "residual": residual,
        "distance": distance,
        "bound": float(np.sqrt(eps)),
        "boundary": eps == 0.25,
        "pass": bool(residual <= tolerance and distance < np.sqrt(eps)),
    }
    return e, report


def odd_antisymmetric_singular(sizes=(3, 5, 7, 9), count: int = 200, seed: int = 0, span: int = 9) -> dict:
    """Exact determinants of random integer antisymmetric matrices of odd size.

    Returns ``{size: number of nonzero determinants}``; every entry should be 0.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for n in sizes:
        if n % 2 == 0:
            raise NumericsError(f"size {n} is even")
        bad = 0
        for _ in range(count):
            upper = np.triu(rng.integers(-span, span + 1, size=(n, n)), 1)
            a = upper - upper.T
            if sympy.Matrix(a.tolist()).det() != 0:
                bad += 1
        out[n] = bad
    return out


def _is_tripotent_exact(u: np.ndarray) -> bool:
    return np.array_equal(u @ u.conj().T @ u, u)


def delta_oracle(f: CartanFactor, mode: str = "constructive", bound: int = 12, seed: int = 0) -> frozenset:
    """Classes of tripotents of ``f`` built explicitly, as K0 coordinate vectors.

    Symmetric factors use diagonal 0/1 matrices, antisymmetric ones stacked
    ``[[0,1],[-1,0]]`` blocks, rectangular ones ``E_11 + .. + E_rr``.
    Odd ranks in the antisymmetric case are excluded by the singularity of
    odd-size antisymmetric integer matrices, checked exactly.
    """
    if mode != "constructive":
        raise NumericsError(f"unknown mode {mode!r}")
    if any(p > bound for p in f.params):
        raise NumericsError(f"{f} exceeds the bound {bound}")
    minus_triple([f])  # principal check
    out = set()
    if f.kind is Kind.I:
        m, n = f.params
        for r in range(min(m, n) + 1):
            u = np.zeros((m, n), dtype=int)
            u[range(r), range(r)] = 1
            assert _is_tripotent_exact(u)
            out.add((int(np.linalg.matrix_rank(u @ u.T)), int(np.linalg.matrix_rank(u.T @ u))))
        return frozenset(out)
    n = f.params[0]
    if f.kind is Kind.III:
        for r in range(n + 1):
            u = np.diag([1] * r + [0] * (n - r))
            assert _is_tripotent_exact(u)
            out.add((int(np.linalg.matrix_rank(u @ u.T)),))
        return frozenset(out)
    J = np.array([[0, 1], [-1, 0]])
    for r in range(n // 2 + 1):
        u = np.zeros((n, n), dtype=int)
        for b in range(r):
            u[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = J
        assert _is_tripotent_exact(u)
        out.add((int(np.linalg.matrix_rank(u @ u.T)),))
    odd = tuple(k for k in range(3, n + 1, 2))
    if odd and any(odd_antisymmetric_singular(odd, count=5, seed=seed).values()):
        raise NumericsError("found a nonsingular odd antisymmetric matrix")
    return frozenset(out)


# -- spin factors ----------------------------------------------------------------


def _spin_inner(a, b) -> complex:
    return complex(np.sum(a * np.conj(b)))


def spin_triple_formula(a, b, c) -> np.ndarray:
    """``⟨a,b⟩c + ⟨c,b⟩a - ⟨a,c̄⟩b̄`` on coordinate vectors."""
    return _spin_inner(a, b) * c + _spin_inner(c, b) * a - _spin_inner(a, np.conj(c)) * np.conj(b)


def spin_norm_formula(z) -> float:
    zz = _spin_inner(z, z).real
    return float(np.sqrt(zz + np.sqrt(max(zz**2 - abs(_spin_inner(z, np.conj(z))) ** 2, 0.0))))


def spin_checks(
    n: int,
    samples: int = 100,
    seed: int = 0,
    tolerance: float = DEFAULT_TOL,
    generators: list[np.ndarray] | None = None,
    bound: int = 12,
) -> dict:
    """Check the Clifford model of the spin factor of dimension ``n``.

    (i) exact anticommutation, (ii) the inner-product triple formula,
    (iii) the norm formula, (iv) self-adjoint norm-one elements are tripotents.
    """
    if not 2 <= n <= bound:
        raise NumericsError(f"n must lie in 2..{bound}")
    gens = clifford_generators(n) if generators is None else generators
    size = gens[0].shape[0]
    eye = np.eye(size)
    anti = all(
        np.array_equal(gens[i] @ gens[j] + gens[j] @ gens[i], 2 * eye * (i == j))
        for i in range(len(gens))
        for j in range(len(gens))
    )
    T = ConcreteTriple(CartanFactor(Kind.IV, (n,)), (size, size), "spinSpan", list(gens), tolerance)
    rng = np.random.default_rng(seed)

    def rvec():
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)

    triple_res = norm_res = trip_res = 0.0
    for _ in range(samples):
        a, b, c = rvec(), rvec(), rvec()
        mat = triple_product(T.from_coords(a), T.from_coords(b), T.from_coords(c))
        want = T.from_coords(spin_triple_formula(a, b, c))
        triple_res = max(triple_res, opnorm(mat - want) / max(1.0, opnorm(want)))
        z = rvec()
        nz = opnorm(T.from_coords(z))
        norm_res = max(norm_res, abs(nz - spin_norm_formula(z)) / max(1.0, nz))
        x = rng.standard_normal(n)
        X = T.from_coords(x)
        X = X / opnorm(X)
        trip_res = max(trip_res, opnorm(X @ X.conj().T @ X - X))
    report = {
        "n": n,
        "seed": seed,
        "samples": samples,
        "anticommutation": anti,
        "tripleResidual": triple_res,
        "normResidual": norm_res,
        "tripotentResidual": trip_res,
        "tolerance": tolerance,
    }
    report["pass"] = bool(anti and triple_res <= tolerance and norm_res <= tolerance and trip_res <= 1e-8)
    return report


def tripotent_span_check(f: CartanFactor, bound: int = 12) -> bool:
    """Whether explicit tripotents span the matrix model of ``f`` (exact rank)."""
    if any(p > bound for p in f.params):
        raise NumericsError(f"{f} exceeds the bound {bound}")
    T = realize_factor(f)
    r, c = T.shape
    trips = []
    if T.membership == "spinSpan":
        trips = [np.rint(s.real).astype(int) + 1j * np.rint(s.imag).astype(int) for s in T.generators]
    else:
        for i in range(r):
            for j in range(c):
                u = np.zeros((r, c), dtype=int)
                if T.membership == "full":
                    u[i, j] = 1
                elif T.membership == "symmetric" and i <= j:
                    u[i, j] = u[j, i] = 1
                elif T.membership == "antisymmetric" and i < j:
                    u[i, j], u[j, i] = 1, -1
                else:
                    continue
                trips.append(u)
    if not all(_is_tripotent_exact(u) for u in trips):
        return False
    rows = [[sympy.nsimplify(complex(x)) for x in u.ravel()] for u in trips]
    rank = sympy.Matrix(rows).rank() if rows else 0
    return rank == T.dimension


# -- JSON matrices ----------------------------------------------------------------


def matrix_from_json(data) -> np.ndarray:
    """Row-major real entries or ``[re, im]`` pairs to a complex array."""
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NumericsError(f"bad matrix JSON: {exc}") from exc
    if arr.ndim == 2:
        return arr.astype(complex)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise NumericsError("matrix JSON must be rows of reals or of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def matrix_to_json(x: np.ndarray) -> list:
    x = np.asarray(x, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in x]
