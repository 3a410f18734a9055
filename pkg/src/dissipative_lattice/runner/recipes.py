"""Named parameter grids, one per reference figure.

Each recipe fixes the anisotropy preset, initial states, bath occupations
and field layouts of one figure, plus the columns that figure plots.  The
time window is not stated per figure, so every recipe integrates to
``t_max = 1000``; only asymptotic values are meant for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .config import REFERENCE_FIELDS, REFERENCE_NBARS, RunConfig, SweepPoint, _anisotropy

__all__ = ["Recipe", "RECIPES", "recipe", "recipe_config"]

NBAR_TO_005 = tuple(n for n in REFERENCE_NBARS if n <= 0.05)
NBAR_TO_001 = tuple(n for n in REFERENCE_NBARS if n <= 0.01)
PSI_M = ("max_entangled",)
PSI_S = ("separable",)
BOTH = ("separable", "max_entangled")


@dataclass(frozen=True)
class Recipe:
    name: str
    description: str
    anisotropy: str
    columns: tuple
    initial_states: tuple = PSI_M
    nbar: tuple = REFERENCE_NBARS
    fields: tuple = REFERENCE_FIELDS
    # explicit (nbar, (B1, B2)) panels replace the nbar x fields product
    panels: tuple | None = None

    def config(self, base: RunConfig | None = None) -> RunConfig:
        base = base or RunConfig()
        cfg = replace(base, name=self.name, anisotropy=(self.anisotropy,),
                      fields=self.fields, nbar=self.nbar,
                      initial_states=self.initial_states, points=None)
        if self.panels is not None:
            label, g, d = _anisotropy(self.anisotropy)
            pts = tuple(SweepPoint(label, g, d, b1, b2, nb, st)
                        for nb, (b1, b2) in self.panels for st in self.initial_states)
            cfg = replace(cfg, points=pts)
        return cfg


def _sz(name, preset, field):
    return Recipe(name, f"<Sz_1>, <Sz_4> of the {preset} model, fields {field}, "
                        "from both reference states", preset, ("Sz_1", "Sz_4"),
                  BOTH, NBAR_TO_001, (field,))


_XXX_PANELS = ((0.0, (1.0, 1.0)), (0.0, (1.0, 0.1)), (0.01, (1.0, 1.0)), (0.01, (0.1, 1.0)))

RECIPES = {r.name: r for r in [
    Recipe("fig2", "Ising C_12 from the maximally entangled state", "ising", ("C_1_2",)),
    Recipe("fig3", "Ising C_14 from the maximally entangled state", "ising", ("C_1_4",),
           nbar=NBAR_TO_005),
    Recipe("fig4", "Ising C_15 from the maximally entangled state", "ising", ("C_1_5",),
           nbar=NBAR_TO_005),
    Recipe("fig5", "Ising tau2 of site 1 from the maximally entangled state", "ising",
           ("tau2_1",)),
    Recipe("fig6", "Ising tau2 of site 4 from the maximally entangled state", "ising",
           ("tau2_4",)),
    Recipe("fig7", "Ising C_12 from the separable state", "ising", ("C_1_2",), PSI_S),
    Recipe("fig8", "Ising C_14 and C_15 from the separable state", "ising",
           ("C_1_4", "C_1_5"), PSI_S, NBAR_TO_005),
    Recipe("fig9", "XYZ C_12 from the maximally entangled state", "xyz", ("C_1_2",),
           nbar=NBAR_TO_005),
    Recipe("fig10", "XYZ C_14 from the maximally entangled state", "xyz", ("C_1_4",)),
    Recipe("fig11", "XYZ C_15 from the maximally entangled state", "xyz", ("C_1_5",)),
    Recipe("fig12", "XYZ C_17 from the maximally entangled state", "xyz", ("C_1_7",),
           nbar=NBAR_TO_005),
    Recipe("fig13", "XYZ tau2 of site 1 from the maximally entangled state", "xyz",
           ("tau2_1",), nbar=NBAR_TO_005),
    Recipe("fig14", "XYZ tau2 of site 4 from the maximally entangled state", "xyz",
           ("tau2_4",)),
    Recipe("fig15", "XYZ C_12 from both reference states", "xyz", ("C_1_2",), BOTH,
           NBAR_TO_005),
    Recipe("fig16", "XXX C_12 and C_14, four (nbar, field) panels", "xxx",
           ("C_1_2", "C_1_4"), panels=_XXX_PANELS),
    _sz("fig17", "ising", (1.0, 1.0)),
    _sz("fig18", "ising", (1.0, 0.1)),
    _sz("fig19", "ising", (0.1, 1.0)),
    _sz("fig20", "xyz", (1.0, 1.0)),
    _sz("fig21", "xyz", (1.0, 0.1)),
    _sz("fig22", "xyz", (0.1, 1.0)),
    Recipe("fig23", "XXX <Sz_1> and <Sz_4>, four (nbar, field) panels", "xxx",
           ("Sz_1", "Sz_4"), panels=_XXX_PANELS),
]}


def recipe(name: str) -> Recipe:
    try:
        return RECIPES[name.lower()]
    except KeyError:
        raise KeyError(f"unknown recipe {name!r}; known: {', '.join(RECIPES)}") from None


def recipe_config(name: str, base: RunConfig | None = None) -> RunConfig:
    return recipe(name).config(base)
