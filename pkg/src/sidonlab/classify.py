"""Classification of tensor powers of block-structured constructions.

For a family whose cut counts are constant on blocks, block ``k`` using cut
count ``R_k`` and having length ``floor(R_k ** alpha)``, with
``sum_k R_k**-delta`` finite for every ``delta > 0``, the ``d``-th power is

- conservative  iff  d <= 1 + alpha      (else totally dissipative),
- singular      iff  d <= 1 + alpha/2    (else absolutely continuous),

decided here by exact rational comparison.  Each verdict ships with the
hypothesis series backing it:

- recurrence series    sum_j r_j ** -(d-1): divergence forces conservativity;
- density series       sum_j r_j ** -(2d-2): convergence forces an
  absolutely continuous component of full support;
- block singularity series  sum_k R_k ** -(2d-2-alpha): divergence forces a
  singular spectral type.

Collapsing a stagewise series by blocks turns it into
``sum_k floor(R_k**alpha) * R_k**-e``, which under the summability condition
diverges exactly when ``alpha - e >= 0``; the blockwise series diverges
exactly when its exponent is ``<= 0``.  Reports carry these margins so the
sign conventions can be audited, and ``series_partial_sums`` evaluates
prefixes exactly (or in documented high precision for irrational terms) as
numerical corroboration.  Verdicts come from the threshold comparisons, never
from summing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .construction import ConstructionSpec, ExplicitStages
from .errors import ClassifyError, SpecError
from .families import SidonBlockRule

SINGULAR = "singular"
ABSOLUTELY_CONTINUOUS = "absolutely_continuous"

DEFAULT_ALPHA_DENOMINATOR_CAP = 64


@dataclass(frozen=True)
class BlockFamily:
    """Classifier view of a block-structured family.

    ``block_cut`` maps block index ``k >= 1`` to the cut count used on that
    block.  ``summable`` asserts ``sum_k block_cut(k)**-delta < infinity``
    for every positive delta; the thresholds are only valid under it.
    """

    alpha: Fraction
    block_cut: Callable[[int], int]
    summable: bool = True

    @staticmethod
    def of(source) -> "BlockFamily":
        if isinstance(source, BlockFamily):
            return source
        if isinstance(source, SidonBlockRule):
            return BlockFamily(
                alpha=source.alpha, block_cut=source.block_cut, summable=source.summable
            )
        if isinstance(source, ConstructionSpec):
            if isinstance(source.rule, SidonBlockRule):
                return BlockFamily.of(source.rule)
            raise ClassifyError(
                f"spec {source.label!r} does not expose a block family"
            )
        if isinstance(source, (int, Fraction)):
            alpha = Fraction(source)
            if alpha < 0:
                raise ClassifyError(f"alpha must be >= 0, got {alpha}")
            # Abstract family: cut counts are irrelevant to the thresholds,
            # a factorial-type growth witnesses summability.
            import math

            return BlockFamily(alpha=alpha, block_cut=lambda k: math.factorial(k + 1))
        raise ClassifyError(f"cannot classify object of type {type(source).__name__}")


@dataclass(frozen=True)
class SeriesEvidence:
    """One hypothesis series with its exponent and exact divergence margin.

    ``margin`` is chosen so the series diverges exactly when it is >= 0.
    For the stagewise series with exponent ``e`` the margin is the
    block-collapse value ``alpha - e``; for the blockwise singularity series
    it is the negated exponent.
    """

    label: str
    exponent: Fraction
    margin: Fraction
    diverges: bool
    implication: str


@dataclass(frozen=True)
class ClassificationReport:
    d: int
    alpha: Fraction
    conservative: bool
    spectral: str
    evidence: tuple[SeriesEvidence, ...]
    rule: str
    annotations: tuple[str, ...] = ()


def classify_power(family, d: int) -> ClassificationReport:
    """Exact classification of the ``d``-th tensor power.

    ``family`` may be a ``BlockFamily``, a ``SidonBlockRule``, a spec built
    on one, or a bare rational alpha.
    """

    fam = BlockFamily.of(family)
    if d < 1:
        raise ClassifyError(f"power must be >= 1, got {d}")
    if not fam.summable:
        raise ClassifyError(
            "family is not summable (sum of cut counts to every negative power "
            "must converge); thresholds do not apply"
        )
    alpha = fam.alpha

    conservative = Fraction(d) <= 1 + alpha
    singular = Fraction(d) <= 1 + Fraction(alpha, 2)

    e_rec = Fraction(d - 1)
    e_den = Fraction(2 * d - 2)
    e_blk = Fraction(2 * d - 2) - alpha
    evidence = (
        SeriesEvidence(
            label="recurrence series sum_j r_j^-(d-1)",
            exponent=e_rec,
            margin=alpha - e_rec,
            diverges=alpha - e_rec >= 0,
            implication="divergence implies conservative",
        ),
        SeriesEvidence(
            label="density series sum_j r_j^-(2d-2)",
            exponent=e_den,
            margin=alpha - e_den,
            diverges=alpha - e_den >= 0,
            implication="convergence implies absolutely continuous",
        ),
        SeriesEvidence(
            label="block singularity series sum_k R_k^-(2d-2-alpha)",
            exponent=e_blk,
            margin=-e_blk,
            diverges=-e_blk >= 0,
            implication="divergence implies singular",
        ),
    )
    rule = (
        f"conservative iff d <= 1 + alpha ({d} vs {fmt_q(1 + alpha)}); "
        f"singular iff d <= 1 + alpha/2 ({d} vs {fmt_q(1 + Fraction(alpha, 2))})"
    )
    return ClassificationReport(
        d=d,
        alpha=alpha,
        conservative=conservative,
        spectral=SINGULAR if singular else ABSOLUTELY_CONTINUOUS,
        evidence=evidence,
        rule=rule,
    )


def fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def classify_range(
    source, d_values: Sequence[int], *, claims: Sequence[tuple[int, str]] | None = None
) -> tuple[list[ClassificationReport], list[str]]:
    """Classify several powers and cross-check any attached outcome claims.

    When ``source`` is a spec carrying claims those are used unless
    overridden.  Returns the reports (annotated in place) and the list of
    claim disagreements.
    """

    if claims is None and isinstance(source, ConstructionSpec):
        claims = source.claims
    fam = BlockFamily.of(source)
    claimed = dict(claims or ())
    reports: list[ClassificationReport] = []
    discrepancies: list[str] = []
    for d in d_values:
        report = classify_power(fam, d)
        claim = claimed.get(d)
        if claim is not None:
            agrees, note = _check_claim(report, claim)
            if not agrees:
                discrepancies.append(note)
            report = ClassificationReport(
                d=report.d,
                alpha=report.alpha,
                conservative=report.conservative,
                spectral=report.spectral,
                evidence=report.evidence,
                rule=report.rule,
                annotations=report.annotations + (note,),
            )
        reports.append(report)
    return reports, discrepancies


def _check_claim(report: ClassificationReport, claim: str) -> tuple[bool, str]:
    d = report.d
    if claim == "singular":
        ok = report.spectral == SINGULAR
        verdict = report.spectral
        note_ok = f"d={d}: claim 'singular' agrees with the threshold verdict"
    elif claim == "lebesgue":
        ok = report.spectral == ABSOLUTELY_CONTINUOUS
        verdict = report.spectral
        note_ok = (
            f"d={d}: claim 'lebesgue' consistent with the threshold verdict "
            "'absolutely_continuous' (the Lebesgue upgrade is conditional)"
        )
    elif claim == "conservative":
        ok = report.conservative
        verdict = "conservative" if report.conservative else "dissipative"
        note_ok = f"d={d}: claim 'conservative' agrees with the threshold verdict"
    else:
        raise ClassifyError(f"unknown claim {claim!r} at d={d}")
    if ok:
        return True, note_ok
    return False, (
        f"d={d}: stated claim {claim!r} conflicts with the threshold verdict "
        f"{verdict!r} for alpha={fmt_q(report.alpha)}"
    )


def series_partial_sums(
    r_of: Callable[[int], int] | Sequence[int],
    exponent: Fraction,
    K: int,
    *,
    dps: int = 50,
):
    """Partial sums ``sum_{j<=k} r_j**-exponent`` for ``k = 1..K``.

    Exact rationals when the exponent is a nonnegative integer; otherwise
    ``mpmath`` values at ``dps`` decimal digits, so each returned sum carries
    an absolute error below ``K * 10**(1-dps)``.
    """

    exponent = Fraction(exponent)
    if exponent < 0:
        raise ClassifyError(f"exponent must be >= 0, got {exponent}")
    if K < 1:
        raise ClassifyError(f"K must be >= 1, got {K}")
    get = r_of.__getitem__ if isinstance(r_of, Sequence) else None

    def term_base(j: int) -> int:
        r = get(j - 1) if get is not None else r_of(j)
        if r < 1:
            raise ClassifyError(f"cut count r_{j} = {r} must be >= 1")
        return r

    if exponent.denominator == 1:
        e = exponent.numerator
        out = []
        total = Fraction(0)
        for j in range(1, K + 1):
            total += Fraction(1, term_base(j) ** e)
            out.append(total)
        return out
    with mpmath.workdps(dps):
        out = []
        total = mpmath.mpf(0)
        e = mpmath.mpf(exponent.numerator) / exponent.denominator
        for j in range(1, K + 1):
            total += mpmath.power(term_base(j), -e)
            out.append(+total)
        return out


def block_collapsed_sums(family, exponent: Fraction, K_blocks: int):
    """Partial sums of the stagewise series collapsed by blocks.

    Block ``k`` contributes ``floor(R_k**alpha) * R_k**-exponent``; exact
    when the exponent is a nonnegative integer.
    """

    fam = BlockFamily.of(family)
    from .families import floor_power

    exponent = Fraction(exponent)
    if exponent < 0:
        raise ClassifyError(f"exponent must be >= 0, got {exponent}")
    if exponent.denominator == 1:
        e = exponent.numerator
        out = []
        total = Fraction(0)
        for k in range(1, K_blocks + 1):
            cut = fam.block_cut(k)
            total += Fraction(floor_power(cut, fam.alpha), cut**e)
            out.append(total)
        return out
    with mpmath.workdps(50):
        out = []
        total = mpmath.mpf(0)
        e = mpmath.mpf(exponent.numerator) / exponent.denominator
        for k in range(1, K_blocks + 1):
            cut = fam.block_cut(k)
            total += floor_power(cut, fam.alpha) * mpmath.power(cut, -e)
            out.append(+total)
        return out


@dataclass(frozen=True)
class AlphaInference:
    alpha: Fraction | None
    blocks: tuple[tuple[int, int], ...]
    reason: str | None = None


def infer_alpha(
    source,
    *,
    max_denominator: int = DEFAULT_ALPHA_DENOMINATOR_CAP,
    block_count: int = 3,
) -> AlphaInference:
    """Recover the exponent alpha from observed block structure.

    Accepts a spec (explicit stage lists are segmented into constant-cut
    runs taken at face value; block rules report their own blocks) or a
    ready list of ``(cut_count, length)`` pairs.  Searches the Stern-Brocot
    tree for the simplest rational alpha with ``floor(R_k**alpha) == L_k``
    for every block; all comparisons are exact integer power tests
    (``L**q <= R**p < (L+1)**q``).  Returns a refusal reason instead of an
    alpha when the data is insufficient or inconsistent, or when no
    denominator up to the cap works.
    """

    blocks = _blocks_of(source, block_count)
    if len(blocks) < 2:
        return AlphaInference(None, tuple(blocks), reason="insufficient data: need >= 2 blocks")
    for r, length in blocks:
        if r < 2:
            return AlphaInference(
                None, tuple(blocks), reason=f"cut count {r} < 2 leaves alpha undetermined"
            )
        if length < 1:
            return AlphaInference(None, tuple(blocks), reason="empty block")

    def classify_candidate(p: int, q: int) -> str:
        too_small = too_big = False
        for r, length in blocks:
            rp = r**p
            if rp < length**q:
                too_small = True
            elif rp >= (length + 1) ** q:
                too_big = True
        if too_small and too_big:
            return "empty"
        if too_small:
            return "small"
        if too_big:
            return "big"
        return "ok"

    # Candidate 0 sits below the tree walk; it is either the answer (every
    # block has length 1) or strictly too small.
    if classify_candidate(0, 1) == "ok":
        return AlphaInference(Fraction(0), tuple(blocks))

    # Stern-Brocot walk between the fences lo < alpha-window <= hi.  Mediant
    # denominators never decrease along the walk, so once the mediant's
    # denominator passes the cap no admissible candidate remains.
    lo = (0, 1)
    hi = (1, 0)
    while True:
        p, q = lo[0] + hi[0], lo[1] + hi[1]
        if q > max_denominator:
            return AlphaInference(
                None,
                tuple(blocks),
                reason=f"no rational alpha with denominator <= {max_denominator} matches",
            )
        state = classify_candidate(p, q)
        if state == "ok":
            return AlphaInference(Fraction(p, q), tuple(blocks))
        if state == "empty":
            return AlphaInference(
                None, tuple(blocks), reason="blocks are inconsistent: no alpha matches"
            )
        if state == "small":
            lo = (p, q)
        else:
            hi = (p, q)


def _blocks_of(source, block_count: int) -> list[tuple[int, int]]:
    if isinstance(source, ConstructionSpec):
        source = source.rule
    if isinstance(source, SidonBlockRule):
        return source.blocks(block_count)
    if isinstance(source, ExplicitStages):
        runs: list[tuple[int, int]] = []
        for st in source.stages:
            if runs and runs[-1][0] == st.r:
                runs[-1] = (st.r, runs[-1][1] + 1)
            else:
                runs.append((st.r, 1))
        return runs
    if isinstance(source, Sequence):
        return [(int(r), int(length)) for r, length in source]
    raise SpecError(f"cannot extract blocks from {type(source).__name__}")
