"""Monte Carlo model of asymmetric utility growth.

Population of n individuals; membership in the app group (prevalence
alpha_sc) and the deputy group (prevalence alpha_cd) is drawn
independently, so the groups may intersect. Contacts are uniform random
pairs. A contact is:

  app-detectable       iff BOTH endpoints run the app        -> ~ alpha_sc^2
  attacker-visible     iff AT LEAST ONE endpoint is a deputy -> ~ 1-(1-alpha_cd)^2

One-sided attacker visibility is weaker in practice (only one vantage
point); `one_sided_quality` in [0, 1] weights those contacts and makes the
assumption explicit. At the default weight 1 the closed forms above hold
exactly in expectation.

Because "attacker view ~ alpha_cd" can also be read per-individual rather
than per-contact, reports carry both statistics: the weighted per-contact
coverage and the empirical deputy fraction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PopulationModel:
    n: int = 10_000
    alpha_sc: float = 0.5
    alpha_cd: float = 0.25
    n_contacts: int = 100_000
    infected_fraction: float = 0.0
    seed: int = 0
    one_sided_quality: float = 1.0

    def __post_init__(self):
        for name in ("alpha_sc", "alpha_cd", "infected_fraction", "one_sided_quality"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.n < 2:
            raise ValueError("population must have at least 2 individuals")
        if self.n_contacts < 1:
            raise ValueError("n_contacts must be positive")


@dataclass(frozen=True)
class CoverageReport:
    alpha_sc: float
    alpha_cd: float
    n_contacts: int
    seed: int
    sc_coverage: float
    attacker_coverage: float
    sc_detected: int
    attacker_weighted: float
    deputy_fraction: float


@dataclass(frozen=True)
class VisibilityReport:
    infected_total: int
    authority_known: int
    attacker_known: int

    @property
    def authority_fraction(self) -> float:
        return self.authority_known / self.infected_total if self.infected_total else 0.0

    @property
    def attacker_fraction(self) -> float:
        return self.attacker_known / self.infected_total if self.infected_total else 0.0


def _draw(model: PopulationModel):
    rng = np.random.default_rng(model.seed)
    sc = rng.random(model.n) < model.alpha_sc
    cd = rng.random(model.n) < model.alpha_cd
    infected = rng.random(model.n) < model.infected_fraction
    a = rng.integers(0, model.n, model.n_contacts)
    # offset trick keeps endpoints distinct and uniform
    b = (a + 1 + rng.integers(0, model.n - 1, model.n_contacts)) % model.n
    return sc, cd, infected, a, b


def simulate_coverage(model: PopulationModel) -> CoverageReport:
    sc, cd, _, a, b = _draw(model)
    sc_hits = sc[a] & sc[b]
    both_cd = cd[a] & cd[b]
    one_cd = (cd[a] ^ cd[b])
    m = model.n_contacts
    weighted = float(np.count_nonzero(both_cd)) + model.one_sided_quality * float(np.count_nonzero(one_cd))
    return CoverageReport(
        alpha_sc=model.alpha_sc,
        alpha_cd=model.alpha_cd,
        n_contacts=m,
        seed=model.seed,
        sc_coverage=float(np.count_nonzero(sc_hits)) / m,
        attacker_coverage=weighted / m,
        sc_detected=int(np.count_nonzero(sc_hits)),
        attacker_weighted=weighted,
        deputy_fraction=float(np.count_nonzero(cd)) / model.n,
    )


def infected_visibility(model: PopulationModel) -> VisibilityReport:
    """Who knows about each infected individual after diagnoses and key uploads.

    The health authority learns every diagnosis. The attacker knows an
    infected individual if they are a deputy themselves, or if they run
    the app (so their keys get published) and at least one of their
    contacts was a deputy that could have harvested them.
    """
    sc, cd, infected, a, b = _draw(model)
    heard = np.zeros(model.n, dtype=bool)
    heard[a[cd[b]]] = True
    heard[b[cd[a]]] = True
    attacker_known = infected & (cd | (sc & heard))
    return VisibilityReport(
        infected_total=int(np.count_nonzero(infected)),
        authority_known=int(np.count_nonzero(infected)),
        attacker_known=int(np.count_nonzero(attacker_known)),
    )


def visibility_from_run(infected_ids, deputy_ids, published_owner_ids, harvested_owner_ids) -> VisibilityReport:
    """Same statistic computed from an end-to-end scenario run."""
    infected = set(infected_ids)
    attacker_known = (infected & set(deputy_ids)) | (
        infected & set(published_owner_ids) & set(harvested_owner_ids)
    )
    return VisibilityReport(
        infected_total=len(infected),
        authority_known=len(infected),
        attacker_known=len(attacker_known),
    )


def sweep(alphas_sc, alphas_cd, n=10_000, n_contacts=100_000, seed=0,
          one_sided_quality=1.0) -> list[CoverageReport]:
    """One coverage report per grid point, deterministic per-cell seeding."""
    reports = []
    for i, a_sc in enumerate(alphas_sc):
        for j, a_cd in enumerate(alphas_cd):
            cell_seed = seed * 1_000_003 + i * 1009 + j
            reports.append(simulate_coverage(PopulationModel(
                n=n, alpha_sc=a_sc, alpha_cd=a_cd, n_contacts=n_contacts,
                seed=cell_seed, one_sided_quality=one_sided_quality,
            )))
    return reports


def write_sweep_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha_sc", "alpha_cd", "sc_coverage", "attacker_coverage", "n_contacts", "seed"])
        for r in reports:
            w.writerow([
                f"{r.alpha_sc:.3f}", f"{r.alpha_cd:.3f}",
                f"{r.sc_coverage:.6f}", f"{r.attacker_coverage:.6f}",
                r.n_contacts, r.seed,
            ])
