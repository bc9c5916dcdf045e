#!/usr/bin/env python3
"""CART member classifiers: Gini splits, midpoint thresholds, and the
flat node-array representation that serializes into model files.
"""

import numpy as np

from fastfood_ensemble import TreeParams, fit_tree, tree_predict, tree_predict_proba
from fastfood_ensemble.rng import Stream
from fastfood_ensemble.tree import LEAF

# XOR needs a zero-gain root split, which CART takes when depth remains
X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
y = np.array([0, 1, 1, 0])
tree = fit_tree(X, y, TreeParams(max_depth=2))
print("XOR, depth 2:")
print(f"  training accuracy {np.mean(tree_predict(tree, X) == y):.0%}")
print(f"  nodes {tree.n_nodes}, depth {tree.depth()}")

for i in range(tree.n_nodes):
    if tree.feature[i] == LEAF:
        print(f"  node {i}: leaf, counts {tree.class_counts[i]}")
    else:
        print(f"  node {i}: x[{tree.feature[i]}] <= {tree.threshold[i]} "
              f"-> ({tree.left[i]}, {tree.right[i]})")

# a noisier problem: leaf class frequencies become probabilities
st = Stream(5)
Xn = st.normals(400 * 3).reshape(400, 3)
yn = ((Xn[:, 0] + 0.5 * st.normals(400)) > 0).astype(int)
tree = fit_tree(Xn, yn, TreeParams(max_depth=4))
probe = np.array([0.1, 0.0, 0.0])
print(f"\nnoisy threshold problem, depth 4, {tree.n_nodes} nodes")
print(f"p(class | x={probe}) = {tree_predict_proba(tree, probe).round(3)}")
