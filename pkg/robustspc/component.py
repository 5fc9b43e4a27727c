"""
.. module:: component

:Synopsis: Base classes for configurable components (chart families) and their lookup
:Author: robustspc developers

A chart family declares its options either as class attributes or in a ``[family].yaml``
file next to its module (not both). Options of parent families are inherited, and
overridden by the child's.
"""

# Global
import inspect
from importlib import resources, import_module
from packaging import version
from typing import Optional, List

# Local
from robustspc.log import HasLogger, LoggedError, get_logger
from robustspc.typing import Any, InfoDict, InfoDictIn, empty_dict
from robustspc.tools import deepcopy_where_possible, get_class_options, \
    similar_chart_families, charts_subfolder
from robustspc.conventions import robustspc_package
from robustspc.yaml import yaml_load

# Attributes of components that are never options
reserved_attributes = {"log", "file_base_name"}


class HasDefaults:
    """
    Base class for components whose options and default values are read from class
    attributes or from a .yaml file.
    """

    @classmethod
    def get_file_base_name(cls) -> str:
        """
        Name of the defaults file (without extension): the module name.
        """
        return cls.__dict__.get('file_base_name') or cls.__module__.split('.')[-1]

    @classmethod
    def get_text_file_content(cls, file_name: str) -> Optional[str]:
        """
        Return the content of a file in the directory of the module, if it exists.
        """
        package = inspect.getmodule(cls).__package__
        try:
            return resources.read_text(package, file_name, encoding="utf-8")
        except FileNotFoundError:
            return None

    @classmethod
    def get_class_options(cls) -> InfoDict:
        """
        Options declared as (non-inherited, non-private) class attributes.
        """
        return get_class_options(cls, reserved_attributes)

    @classmethod
    def get_defaults(cls) -> InfoDict:
        """
        Options and default values of this component, including those of its bases
        (overridden by the component's own).
        """
        file_name = cls.get_file_base_name() + ".yaml"
        yaml_text = cls.get_text_file_content(file_name)
        options = cls.get_class_options()
        if options and yaml_text:
            raise LoggedError(get_logger(cls.__name__),
                              "%s: options must be given either in %s or as class "
                              "attributes, not both. Class attributes: %s",
                              cls.__name__, file_name, list(options))
        defaults: InfoDict = {}
        for base in cls.__bases__:
            if issubclass(base, HasDefaults) and base is not HasDefaults:
                defaults.update(base.get_defaults())
        defaults.update((yaml_load(yaml_text) or {}) if yaml_text
                        else deepcopy_where_possible(options))
        return defaults

    @classmethod
    def get_annotations(cls) -> InfoDict:
        d = {}
        for base in cls.__bases__:
            if issubclass(base, HasDefaults) and base is not HasDefaults:
                d.update(base.get_annotations())
        d.update({k: v for k, v in cls.__dict__.get("__annotations__", {}).items()
                  if not k.startswith('_')})
        return d


class Component(HasLogger, HasDefaults):
    """
    Component whose options, from the input merged with the defaults, become instance
    attributes.
    """

    def __init__(self, info: InfoDictIn = empty_dict, name: Optional[str] = None,
                 initialize=True, standalone=True):
        self._name = name or self.__class__.__name__
        self.set_logger(name=self._name)
        if standalone:
            defaults = self.get_defaults()
            unknown = set(info or {}).difference(defaults)
            if unknown:
                raise LoggedError(
                    self.log, "Unknown option(s) %r for '%s'. Known options are %r.",
                    sorted(unknown), self._name, list(defaults))
            info = {**defaults, **(info or {})}
        self.set_instance_defaults()
        annotations = self.get_annotations()
        for k, value in (info or {}).items():
            self.validate_info(k, value, annotations)
            setattr(self, k, value)
        if initialize:
            self.initialize()

    def get_name(self) -> str:
        return getattr(self, "_name", self.__class__.__name__)

    def __repr__(self):
        return self.get_name()

    def set_instance_defaults(self):
        """
        Sets instance attributes that are not options, before the options are set.
        """

    def initialize(self):
        """
        Checks the options (called from __init__, after options are set).
        """

    def validate_info(self, k: str, value: Any, annotations: dict):
        # catches e.g. "false" given for a boolean, which would evaluate true
        if annotations.get(k) is bool and value and isinstance(value, str):
            raise LoggedError(self.log, "Option '%s' of '%s' should be True or False. "
                                        "Got '%s'.", k, self, value)


def version_at_least(version_a, version_b) -> bool:
    """Whether ``version_a`` is equal to or higher than ``version_b``."""
    return version.parse(str(version_a)) >= version.parse(str(version_b))


class ChartNotFoundError(LoggedError):
    """
    Exception to be raised when a chart family name could not be identified
    (in order to distinguish that case from any other error occurring at import time).
    """


def get_component_class(name, logger=None, not_found_level=None):
    """
    Retrieves the requested chart class from its family name (e.g. ``trimmed_ewma``), or
    from a full ``module.ClassName`` path for charts defined outside robustspc.

    If the argument is a class, it is simply returned.

    If the class is not found, it raises :class:`ChartNotFoundError`, with suggestions of
    similar family names. Any other exception means that the class was found but could
    not be imported.
    """
    from robustspc.chart import Chart
    if not isinstance(name, str):
        return name
    if not logger:
        logger = get_logger(__name__)
    if '.' in name:
        module_name, class_name = name.rsplit('.', 1)
        try:
            cls = getattr(import_module(module_name), class_name)
        except (ModuleNotFoundError, AttributeError):
            raise ChartNotFoundError(logger, f"External chart '{name}' could not be "
                                             f"found.", level=not_found_level)
    else:
        internal = f"{robustspc_package}.{charts_subfolder}.{name}"
        try:
            module = import_module(internal)
        except ModuleNotFoundError as excpt:
            # only if this module in particular was not found
            if not str(excpt).rstrip("'").endswith(name):
                logger.error(f"There was a problem when importing '{name}':")
                raise
            suggestions = similar_chart_families(name)
            raise ChartNotFoundError(
                logger, "Chart family '%s' could not be found.%s", name,
                (" Did you mean %s?" % " or ".join(repr(s) for s in suggestions)
                 if suggestions else ""), level=not_found_level)
        cls = chart_class_in_module(module, name, Chart)
        if cls is None:
            raise ChartNotFoundError(logger, "No chart class for family '%s'.", name,
                                     level=not_found_level)
    if not (isinstance(cls, type) and issubclass(cls, Chart)):
        raise TypeError(f"Class '{name}' is not a chart class.")
    return cls


def chart_class_in_module(module, name: str, subclass_of: type) -> Optional[type]:
    """
    Class of the module (imported ones included) whose lowercase name is the family
    name, with or without inner underscores (``trimmed_ewma`` -> ``TrimmedEWMA``).
    """
    valid_names = {name, name[:1] + name[1:].replace('_', '')}
    found = {cls for _, cls in inspect.getmembers(module, inspect.isclass)
             if issubclass(cls, subclass_of) and cls.__name__.lower() in valid_names}
    if len(found) > 1:
        raise ValueError(f"More than one chart class for family '{name}': {found}")
    return found.pop() if found else None


__all__: List[str] = ["HasDefaults", "Component", "ChartNotFoundError",
                      "get_component_class", "chart_class_in_module", "version_at_least",
                      "reserved_attributes"]
