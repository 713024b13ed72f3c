"""Hot-kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set QUADCERT_PURE_PYTHON=1 to force the fallback (used by the benchmark to
compare both paths). The exposed surface:

- poly_mul_arrays(ea, ca, eb, cb) -> (exps, coefs): sparse polynomial product.
- gram_expand_arrays(basis, G, gexps, gcoefs) -> (exps, coefs): expansion of
  b(x)^T G b(x) * g(x), the certificate-verification workhorse.
- make_block_ops(s, m, rows, cols_r, cols_c, vals) -> object with
  dots / weighted_sum / schur_accumulate, the SDP solver inner loops.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("QUADCERT_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

COMPILED: bool = bool(getattr(_impl, "COMPILED", False))

poly_mul_arrays = _impl.poly_mul_arrays
gram_expand_arrays = _impl.gram_expand_arrays
make_block_ops = _impl.make_block_ops


def implementation_name() -> str:
    return "compiled" if COMPILED else "pure-python"
