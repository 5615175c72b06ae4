"""Ready-made experiment configs.

Presets marked ``scaled`` shrink a matrix size so the run fits a desk
machine; their outputs carry the flag in metadata and plot titles.
"""

import copy

# mask translations, one [dy, dx] pair per frame
SHIFTS = {
    2: [[5, 3], [6, 8]],
    4: [[7, 8], [2, 8], [6, 1], [3, 5]],
    6: [[6, 7], [3, 6], [6, 2], [1, 4], [8, 3], [5, 2]],
}
TRACE_SHIFTS = {
    2: [[3, 1], [5, 5]],
    3: [[7, 7], [4, 4], [7, 3]],
    4: [[1, 2], [6, 6], [7, 3], [2, 7]],
}

_CACTI_SPARSITIES = [0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]


def _cacti(experiment, T, shifts, **kw):
    return {"experiment": experiment, "dims": {"n1": 8, "n2": 8}, "T": T, "shifts": shifts, **kw}


PRESETS = {}

for _T in (2, 4, 6):
    PRESETS[f"cacti-rrmse-T{_T}"] = (
        f"RRMSE of random vs coherence-designed 8x8 codes, T={_T}",
        _cacti("cacti-rrmse", _T, SHIFTS[_T], sparsities=_CACTI_SPARSITIES),
    )
    PRESETS[f"cacti-eigen-T{_T}"] = (
        f"restricted eigenvalues on the RRMSE supports, T={_T}",
        _cacti("cacti-eigen", _T, SHIFTS[_T], sparsities=_CACTI_SPARSITIES),
    )

for _m, _scaled in ((499, False), (250, False), (125, False)):
    PRESETS[f"trace-general-{_m}x500"] = (
        f"coherence-bound trace, {_m}x500 Gaussian",
        {"experiment": "trace-general", "dims": {"m": _m, "n": 500}},
    )
PRESETS["trace-general-99x100"] = (
    "coherence-bound trace, 99x100 Gaussian (scaled stand-in for 499x500)",
    {"experiment": "trace-general", "dims": {"m": 99, "n": 100}, "scaled": True},
)
for _T, _sh in TRACE_SHIFTS.items():
    PRESETS[f"trace-cacti-T{_T}"] = (
        f"coherence-bound trace for random and designed CACTI codes, T={_T}",
        _cacti("trace-cacti", _T, _sh),
    )
for _T in (6,):
    PRESETS[f"trace-cacti-T{_T}"] = (
        f"coherence-bound trace for random and designed CACTI codes, T={_T}",
        _cacti("trace-cacti", _T, SHIFTS[_T]),
    )

for _m in (10, 55, 85):
    PRESETS[f"tang-{_m}x100"] = (
        f"Tang-bound looseness, {_m}x100 Gaussian",
        {"experiment": "tang-looseness", "dims": {"m": _m, "n": 100}, "sparsities": [0.01, 0.02, 0.03]},
    )

PRESETS["ric-549x550"] = (
    "Cai-bound looseness, 549x550 column-normalized Gaussian, k=2",
    {"experiment": "ric-looseness", "dims": {"m": 549, "n": 550}, "k": [2]},
)
PRESETS["ric-275x550"] = (
    "Cai-bound looseness, 275x550 column-normalized Gaussian, k=2 (exits 3 if delta_2 >= 0.307)",
    {"experiment": "ric-looseness", "dims": {"m": 275, "n": 550}, "k": [2]},
)

for _T, _s in ((2, 0.2), (4, 0.12), (6, 0.08)):
    PRESETS[f"mmse-cacti-T{_T}"] = (
        f"MSE vs coherence vs random codes, 8x8, T={_T}, s={_s}",
        _cacti("mmse-compare", _T, SHIFTS[_T], sparsities=[_s], num_vectors=250,
               search={"iters": 40}),
    )
PRESETS["mmse-general-25x50"] = (
    "MSE vs coherence vs random 25x50 matrices, s=0.2",
    {"experiment": "mmse-compare", "dims": {"m": 25, "n": 50}, "sparsities": [0.2],
     "num_vectors": 250, "search": {"iters": 40}},
)
PRESETS["mmse-general-8x50"] = (
    "MSE vs coherence vs random 8x50 matrices, s=0.08",
    {"experiment": "mmse-compare", "dims": {"m": 8, "n": 50}, "sparsities": [0.08],
     "num_vectors": 250, "search": {"iters": 40}},
)


def preset(name):
    """A fresh copy of the named preset's config dict."""
    try:
        return copy.deepcopy(PRESETS[name][1])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}") from None
