from ratnet.constructive.builders import (
    PiecewiseLinear, monomial_network, piecewise_network, product_gadget,
    ratify_relu_network
)
from ratnet.constructive.network import Layer, RationalNetwork
from ratnet.constructive.taylor import taylor_network

__all__ = [
    'Layer',
    'PiecewiseLinear',
    'RationalNetwork',
    'monomial_network',
    'piecewise_network',
    'product_gadget',
    'ratify_relu_network',
    'taylor_network',
]
