# app/modules/__init__.py
# This file makes 'modules' a Python package.
# Dependency order: tensor_core -> nn_ops -> backbone / attention -> network
# -> data -> evaluation -> training -> verification.
