"""teichlab: a numerical laboratory for SL(2,R) spherical-function
asymptotics, Laplace-transform extensions on toy operators, square-tiled
translation surfaces with the saddle-connection Finsler norm, and
recurrence/correlation experiments for the diagonal flow."""

__version__ = "0.1.0"
