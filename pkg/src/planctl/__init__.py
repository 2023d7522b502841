"""planctl: compile DML-subset scripts into hybrid CP/MR plans and cost them."""

__version__ = "0.1.0"
