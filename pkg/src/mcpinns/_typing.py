"""Shared runtime type-checking configuration."""

from beartype import BeartypeConf, beartype

# Accept ints wherever a float is annotated (PEP 484 numeric tower).
checked = beartype(conf=BeartypeConf(is_pep484_tower=True))
