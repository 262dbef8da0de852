"""
==========
catalog.py
==========

JSON-backed record objects and the shipped germ catalog. Callers should
generally only call ``load_catalog`` and look entries up by name; the
entries are built from the catalog JSON.
"""

import copy
from functools import lru_cache
import json
import os

from chiralkit.exceptions import NonCriticalOrigin, UnknownGerm
from chiralkit.polyform import parse_one_form, parse_polynomial

CATALOG_PATH = os.path.join(os.path.dirname(__file__), 'data', 'germs.json')


class JsonObject(object):
    """
    Base class for records deserialized from JSON

    Attributes
    ----------
    data : dictionary
        The JSON data object / dictionary used to build this object

    properties: list
        A list of properties that are included in string representations
    """
    reprdepth = 0

    def __init__(self, data, properties=[], list_properties={}):
        """
        Constructor

        Parameters
        ----------
        data : dictionary
            The JSON dictionary created by json.loads at the root of this object
        properties : list, optional
            A list of properties that should be extracted to attributes, by default []
        list_properties : dict, optional
            A dictionary of property name to type for properties that are lists of
            JSONObject classes, by default {}
        """
        self.data = copy.deepcopy(data) or {}
        self.properties = properties + list(list_properties.keys())
        for prop in properties:
            setattr(self, prop, self.data.get(prop))
        for prop in list_properties:
            Class = list_properties[prop]
            items = self.data.get(prop) or []
            setattr(self, prop, [Class(item) for item in items])

    def __getitem__(self, key):
        """
        Retrieve the value corresponding to a key in data

        Parameters
        ----------
        key : str
            The key to retrieve the value for

        Returns
        -------
        value : object or None
            The value corresponding to the key if it exists, otherwise None
        """
        return self.data.get(key)

    def to_json(self):
        return copy.deepcopy(self.data)

    def __repr__(self):
        result = ''
        JsonObject.reprdepth += 1
        try:
            spaces = '    ' * JsonObject.reprdepth
            result += '<' + self.__class__.__name__ + '\n'
            result += '\n'.join(["%s%s = %s" % (spaces, p, repr(getattr(self, p)))
                                 for p in self.properties])
            result += '>'
        finally:
            JsonObject.reprdepth -= 1
        return result


class GermCatalogEntry(JsonObject):
    """
    A named polynomial germ with a critical point at the origin.

    Attributes
    ----------
    name : string
        The catalog label, e.g. "Morse1" or "D4minus"
    phi : string
        The germ in the inline polynomial grammar
    expected_index : int or None
        The index of grad phi at the origin, when known
    notes : string
        Free text
    radius : float or None
        Recommended sphere radius for index computations (default 1)
    perturbation : string or None
        A known 1-form nu, "P, Q, R", such that d phi + t nu is a singular
        contact form for small t > 0
    polynomial : chiralkit.polyform.Polynomial
        phi, parsed
    nu : chiralkit.polyform.DifferentialForm or None
        perturbation, parsed
    """

    def __init__(self, data):
        super().__init__(data, properties=['name', 'phi', 'expected_index', 'notes', 'radius', 'perturbation'])
        self.polynomial = parse_polynomial(self.phi)
        self.nu = parse_one_form(self.perturbation) if self.perturbation else None
        self.validate()

    def validate(self):
        """
        Raises
        ------
        NonCriticalOrigin
            if phi(0) != 0 or grad phi(0) != 0
        """
        low = {e for e in self.polynomial.terms if sum(e) <= 1}
        if low:
            raise NonCriticalOrigin(f'Catalog germ {self.name} has constant or linear terms')

    @property
    def sphere_radius(self):
        return float(self.radius) if self.radius is not None else 1.0


class GermCatalog(JsonObject):
    """
    The list of shipped germs.

    Attributes
    ----------
    version : int
        Schema version of the catalog file
    germs : list
        A list of GermCatalogEntry objects
    """

    def __init__(self, data):
        super().__init__(data, properties=['version'], list_properties={'germs': GermCatalogEntry})

    @property
    def names(self):
        return [g.name for g in self.germs]

    def lookup(self, name):
        """
        Raises
        ------
        UnknownGerm
            if no entry carries the name (case-insensitive)
        """
        for germ in self.germs:
            if germ.name.lower() == str(name).lower():
                return germ
        raise UnknownGerm(f"Unknown germ {name!r}; known germs: {', '.join(self.names)}")

    def __contains__(self, name):
        return any(g.name.lower() == str(name).lower() for g in self.germs)


@lru_cache(maxsize=4)
def load_catalog(path=CATALOG_PATH):
    """Loads and validates a germ catalog file (the shipped one by default)."""
    with open(path) as f:
        return GermCatalog(json.load(f))
