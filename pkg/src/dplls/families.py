"""Response-distribution families for (log-)location-scale regression."""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import ValidationError

_TAGS = ("sev", "logistic")

# User-facing names accepted by parsers and the CLI.  The log variants share
# the likelihood of their base family and differ only in the response
# pre-transform y = log(raw response).
_ALIASES = {
    "sev": ("sev", False),
    "logistic": ("logistic", False),
    "weibull": ("sev", True),
    "loglogistic": ("logistic", True),
}


@dataclass(frozen=True)
class Family:
    """A location-scale family tag plus the log-response flag.

    ``log_response`` only selects the response pre-transform; all likelihood
    math sees the transformed response and is identical for both readings.
    """

    tag: str
    log_response: bool = False

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValidationError(
                f"unknown family tag {self.tag!r}; expected one of {_TAGS}"
            )

    @property
    def is_sev(self) -> bool:
        return self.tag == "sev"

    @property
    def name(self) -> str:
        for alias, (tag, log_response) in _ALIASES.items():
            if (tag, log_response) == (self.tag, self.log_response):
                return alias
        return self.tag

    @staticmethod
    def parse(name) -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        if key not in _ALIASES:
            raise ValidationError(
                f"unknown family {name!r}; expected one of {sorted(_ALIASES)}"
            )
        tag, log_response = _ALIASES[key]
        return Family(tag, log_response)


SEV = Family("sev")
LOGISTIC = Family("logistic")
WEIBULL = Family("sev", log_response=True)
LOGLOGISTIC = Family("logistic", log_response=True)
