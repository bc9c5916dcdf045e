#!/usr/bin/env python3
"""End-to-end ensemble: project wide features into N random subspaces,
train one tree per subspace, fuse by weighted average.

The consensus is reliably stronger than any individual member because
the members see diverse random views of the same data.
"""

import os
import tempfile

import numpy as np

from fastfood_ensemble import (
    EnsembleConfig,
    FeatureMatrix,
    apply_nonlinearity,
    evaluate,
    load_model,
    project,
    save_model,
    synth_mixture,
    train_ensemble,
    tree_predict_proba,
)

# stand-in for pooled CNN features: 4 classes, 2048 dims, 100 rows/class
data = synth_mixture(n_classes=4, n_per_class=100, m=2048, separation=20.0, seed=42)
tr, te = [], []
for c in range(4):
    pos = np.nonzero(data.labels == c)[0]
    tr.extend(pos[:50])
    te.extend(pos[50:])
train = FeatureMatrix(values=data.values[tr], labels=data.labels[tr],
                      class_names=data.class_names)
test = FeatureMatrix(values=data.values[te], labels=data.labels[te],
                     class_names=data.class_names)

config = EnsembleConfig(n_members=10, d_out=100)
model = train_ensemble(train, None, config, master_seed=7)
report = evaluate(model, test)

print(f"M={train.n_dims} -> D={config.d_out}, N={config.n_members} members")
print(f"ensemble accuracy  {report.accuracy:.3f}")

Xte = test.values.astype(np.float64)
accs = []
for i in range(config.n_members):
    Z = apply_nonlinearity(project(model.member_block(i), Xte),
                           model.member_nonlinearity(i))
    pred = np.argmax(tree_predict_proba(model.members[i].tree, Z), axis=1)
    accs.append(float(np.mean(pred == test.labels)))
print(f"member accuracies  best {max(accs):.3f}, mean {np.mean(accs):.3f}")
print(f"confusion:\n{report.confusion}")

# model files hold seeds, not matrices, so they stay small
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "model.dfem")
    save_model(model, path)
    size = os.path.getsize(path)
    dense_bytes = 8 * config.n_members * config.d_out * train.n_dims
    print(f"\nmodel file {size / 1024:.0f} KiB "
          f"(explicit member matrices would be {dense_bytes / 1e6:.0f} MB)")
    reloaded = load_model(path)
    same = evaluate(reloaded, test).accuracy == report.accuracy
    print(f"reloaded model reproduces predictions: {same}")
