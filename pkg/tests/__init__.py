# tests/__init__.py
# Makes the test directory a package so test modules import by name.
