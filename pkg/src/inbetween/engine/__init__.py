from .tensor import (
    Tensor,
    abs_,
    add,
    concat,
    default_dtype,
    div,
    grad_enabled,
    l1_norm,
    matmul,
    mean,
    mul,
    no_grad,
    plu,
    relu,
    reshape,
    scale,
    set_default_dtype,
    sigmoid,
    sqrt,
    square,
    sum_,
    take,
    tanh,
)
from .layers import FeedForward, Linear, LSTMCell, Parameter, lstm_step
from .optim import AmsGrad
from .gradcheck import GradCheckReport, gradient_check

__all__ = [
    "Tensor", "abs_", "add", "concat", "default_dtype", "div", "grad_enabled",
    "l1_norm", "matmul", "mean", "mul", "no_grad", "plu", "relu", "reshape",
    "scale", "set_default_dtype", "sigmoid", "sqrt", "square", "sum_", "take",
    "tanh", "FeedForward", "Linear", "LSTMCell", "Parameter", "lstm_step",
    "AmsGrad", "GradCheckReport", "gradient_check",
]
