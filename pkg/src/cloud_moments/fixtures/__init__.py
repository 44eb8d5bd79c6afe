"""JSON fixtures: measure specs and moment tables shipped with the package."""
