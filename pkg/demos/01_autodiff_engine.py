"""Tour of the dense-tensor kernel: forward ops, adjoints, gradient checking.

Run:  python3 demos/01_autodiff_engine.py
"""

import numpy as np

from milvad import Tensor, affine, backward, conv1d, grad_check, lstm_forward, pool
from milvad.tensor import uniform_param

rng = np.random.default_rng(0)

# ---------------------------------------------------------------- forward ops
print("== forward primitives ==")
x = Tensor(rng.normal(size=(5, 3)))
w = Tensor(rng.normal(size=(3, 2)))
b = Tensor(np.zeros(2))
y = affine(x, w, b, activation="sigmoid")
print("affine (5,3)@(3,2) + bias, sigmoid ->", y.shape, "values in (0,1):",
      float(y.data.min()) > 0 and float(y.data.max()) < 1)

# dilated temporal convolution with same-zero padding keeps the length
taps = Tensor(np.ones((3, 1, 1)))
signal = Tensor(np.arange(1.0, 6.0).reshape(5, 1))
smoothed = conv1d(signal, taps, Tensor(np.zeros(1)), dilation=1)
print("conv1d box filter over [1..5]:", smoothed.data.ravel(), "(edges see zero padding)")

seq = Tensor(rng.normal(size=(7, 4)))
hidden = lstm_forward(seq,
                      uniform_param(rng, (4, 20), fan_in=4),
                      uniform_param(rng, (5, 20), fan_in=5),
                      uniform_param(rng, (20,), fan_in=5))
print("lstm over 7 steps, 5 hidden units ->", hidden.shape)

# ------------------------------------------------------------------ backward
print("\n== reverse-mode differentiation ==")
p = Tensor(np.array([0.0, 1.0, -1.0]), requires_grad=True)
loss = p.sigmoid().sum()
backward(loss)
print("d sum(sigmoid(p)) / dp =", np.round(p.grad, 4), "(0.25 at p=0)")

# max pooling routes the gradient to the first maximal element
tie = Tensor(np.array([2.0, 2.0, 1.0]), requires_grad=True)
backward(pool(tie, axis=0, mode="max"))
print("max-pool tie-break gradient:", tie.grad)

# -------------------------------------------------------------- verification
print("\n== finite-difference verification ==")
inputs = Tensor(rng.normal(size=(6, 2)))
weight = uniform_param(rng, (3, 2, 2), fan_in=6)
bias = uniform_param(rng, (2,), fan_in=6)


def build():
    return conv1d(inputs, weight, bias, dilation=2).tanh().sum()


err = grad_check(build, eps=1e-5)
print(f"conv1d+tanh chain: max relative error vs central differences = {err:.2e}")

# the full table lives behind the command line as well:
print("\nfor the complete table over every primitive and composite run:")
print("   python3 -m milvad gradcheck")
