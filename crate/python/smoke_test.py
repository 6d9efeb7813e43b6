"""Builds the extension with cargo, imports it and exercises the main calls.

Run from anywhere: python3 python/smoke_test.py
"""

import json
import os
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_extension(dest):
    subprocess.run(
        ["cargo", "build", "--release", "-p", "corrlog-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(ROOT, "target"))
    for name in ("libcorrlog.so", "libcorrlog.dylib", "corrlog.dll"):
        built = os.path.join(target, "release", name)
        if os.path.exists(built):
            suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
            shutil.copy(built, os.path.join(dest, "corrlog" + suffix))
            return
    raise SystemExit("extension library not found under " + target)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        build_extension(tmp)
        sys.path.insert(0, tmp)
        import corrlog

        train, test = corrlog.generate_toy(seed=3)
        assert len(train) == 500 and train.num_features == 3

        model, info = corrlog.train(train, epsilon=0.0)
        assert info["converged"], info
        assert model.num_labels == 2 and len(model.alpha()) == 1

        baseline, _ = corrlog.train(train, epsilon=0.0, ilrs=True)
        assert baseline.alpha() == []

        preds = corrlog.predict(model, test)
        scores = corrlog.metrics(test.labels(), preds)
        base_scores = corrlog.metrics(test.labels(), corrlog.predict(baseline, test))
        assert scores["zero_one_loss"] < base_scores["zero_one_loss"], (scores, base_scores)

        x = test.features()[0]
        labels, converged = model.predict(x)
        assert converged and labels == model.predict_exact(x)

        path = os.path.join(tmp, "model.json")
        model.save(path)
        again = corrlog.Model.load(path)
        assert again == model
        assert again.to_json() == model.to_json()
        assert "--" in model.label_graph(["y1", "y2"])

        zero = corrlog.Model.zeros(3, 2)
        assert zero.predict([0.0, 0.0])[0] == [1, 1, 1]
        try:
            zero.set_alpha(1, 1, 0.5)
        except ValueError:
            pass
        else:
            raise AssertionError("self pair accepted")

        ds = corrlog.Dataset([[0.5, 0.5]], [[1, -1]])
        fixture = corrlog.metrics([[1, -1, 1]], [[1, 1, 1]])
        assert abs(fixture["hamming_loss"] - 1 / 3) < 1e-15 and fixture["f1_example"] == 0.8
        assert len(ds) == 1

        cv = corrlog.cross_validate(train, folds=5, epsilon=0.0)
        assert set(cv["metrics"]) == {
            "hamming_loss", "zero_one_loss", "accuracy", "f1_example", "macro_f1", "micro_f1",
        }
        print(json.dumps({"test_metrics": scores, "baseline_metrics": base_scores}, indent=2))
        print("python smoke test passed")


if __name__ == "__main__":
    main()
