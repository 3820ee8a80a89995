"""ReLU networks: representation, exact constructions and gadgets."""
from .builder import affine, chain, compose, deepen, identity, parallel, select, stack
from .gadgets import (
    BoxedNetwork,
    hat_trunk,
    linear_branch_net,
    product_error_bound,
    product_gadget,
    reciprocal_error_bound,
    reciprocal_gadget,
    square_error_bound,
    square_gadget,
)
from .network import ReluNetwork, dumps, evaluate, load, loads, save
from .compile import BlessedCascadeNet, CompiledRational, blessed_cascade_net, compile_rational_R
