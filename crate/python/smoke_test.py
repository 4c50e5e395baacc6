"""Smoke test for the hybridssl Python extension.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import math
import os
import tempfile

import hybridssl


def main():
    assert hybridssl.lambda_to_gamma(0.5) == 1.0
    assert abs(hybridssl.beta_prior_variance(0.0, 10.0) - 0.44264591147423065) < 1e-9

    full = hybridssl.Dataset.synthetic(2, 50, 200, 0.5, seed=1)
    train, test = full.split(10, unlabeled=100, seed=3)
    assert len(train) == 120 and train.num_labeled == 20

    model = hybridssl.train(train, lambda_=0.5, seed=7, max_iters=50)
    acc = model.accuracy(test)
    print(f"mode={model.mode} iterations={len(model.trace)} accuracy={acc:.4f}")
    assert 0.5 < acc <= 1.0
    assert all(math.isfinite(v) for v in model.trace)
    for p in model.predict_proba(test)[:5]:
        assert abs(sum(p) - 1.0) < 1e-12

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "model.txt")
        model.save(path)
        again = hybridssl.Model.load(path)
        assert again.w == model.w and again.predict(test) == model.predict(test)

    ds = hybridssl.Dataset([(0, [3, 1]), (None, [2])], 2, 4)
    assert ds.labels == [0, None]
    try:
        hybridssl.train(train, lambda_=1.5)
    except ValueError as e:
        assert "lambda" in str(e)
    else:
        raise AssertionError("lambda outside [0, 1] accepted")
    print("ok")


if __name__ == "__main__":
    main()
