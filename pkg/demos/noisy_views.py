# When every view is already unsure of itself there is little certainty
# left to disagree with, so discounting has nothing to work on.
from evfusion import run_experiment

base = dict(methods="gbaf,dbf", seeds="0-1", n_classes=4, n_views=3, dim=8, separation=6.0,
            n_samples=1000, epochs=20)

for noise in (1.0, 3.0, 5.0):
    report = run_experiment({**base, "noise": noise})
    auc = {m: report.mean(m, "auc") for m in ("gbaf", "dbf")}
    acc = report.mean("dbf", "clean_accuracy")
    print(f"noise {noise}: auc gbaf {auc['gbaf']:.3f} dbf {auc['dbf']:.3f}  dbf clean acc {acc:.3f}")

report.write("noisy_views_out")
print("wrote noisy_views_out/")
