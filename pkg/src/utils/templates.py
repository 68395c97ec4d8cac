import logging
from pathlib import Path
import re
from typing import Dict, List, Optional, Set

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

# template name -> variables it must use
REQUIRED_VARIABLES = {
    "check_result": ["status", "name", "selector", "grid_index", "expected", "actual"],
    "verification_summary": ["selector", "max_n", "passed", "failed", "errors", "skipped"],
    "invariants": ["grid", "tau", "epsilon", "mode", "test"],
    "grid_info": ["grid", "n", "components", "writhe", "tb"],
    "bench": ["grid", "states", "arrows"],
}


class TemplateError(Exception):
    """Exception raised for template-related errors."""

    def __init__(self, message: str, template_name: Optional[str] = None):
        self.template_name = template_name
        if template_name:
            super().__init__(f"Template error in '{template_name}': {message}")
        else:
            super().__init__(f"Template error: {message}")


class TemplateManager:
    """Loads the text report templates and renders them."""

    def __init__(self, template_dir: Optional[str] = None):
        self.template_dir = Path(template_dir) if template_dir else DEFAULT_TEMPLATE_DIR
        self._templates: Optional[Dict[str, str]] = None

    @property
    def templates(self) -> Dict[str, str]:
        if self._templates is None:
            self._templates = self.load_templates(str(self.template_dir))
        return self._templates

    def load_templates(self, template_dir: str) -> Dict[str, str]:
        """Load every *.txt file of a directory, keyed by file stem.

        Raises:
            TemplateError: If the directory is missing or holds no templates
        """
        template_path = Path(template_dir)

        if not template_path.is_dir():
            raise TemplateError(f"Template directory '{template_dir}' does not exist")

        templates = {}
        for template_file in sorted(template_path.glob("*.txt")):
            try:
                templates[template_file.stem] = template_file.read_text(encoding="utf-8")
            except OSError as e:
                raise TemplateError(f"Failed to load template from '{template_file}': {e}", template_file.stem) from e
            logger.debug(f"Loaded template '{template_file.stem}' from {template_file}")

        if not templates:
            raise TemplateError(f"No template files found in '{template_dir}'")

        logger.info(f"Loaded {len(templates)} templates from {template_dir}")
        return templates

    def render(self, template_name: str, /, **kwargs) -> str:
        """Fill a template; every keyword, ``name`` included, is a template variable."""
        if template_name not in self.templates:
            raise TemplateError("Unknown template", template_name)
        return self.format_template(self.templates[template_name], **kwargs)

    def format_template(self, template: str, **kwargs) -> str:
        try:
            return template.format(**kwargs)
        except KeyError as e:
            missing_var = str(e).strip("'\"")
            raise TemplateError(f"Missing required variable: {missing_var}") from e
        except (ValueError, IndexError) as e:
            raise TemplateError(f"Template formatting failed: {e}") from e

    def validate_template_vars(self, template: str, required_vars: List[str]) -> List[str]:
        """Error messages for missing variables and unbalanced braces; empty when valid."""
        errors = [f"Missing required variable: {var}" for var in sorted(set(required_vars) - _template_vars(template))]

        open_braces, close_braces = template.count("{"), template.count("}")
        if open_braces != close_braces:
            errors.append(f"Unmatched braces: {open_braces} open, {close_braces} close")
        if "{}" in template:
            errors.append("Empty variable placeholder found: {}")

        logger.debug(f"Template validation found {len(errors)} errors")
        return errors

    def validate_all(self) -> List[str]:
        errors = []
        for name, required in REQUIRED_VARIABLES.items():
            if name not in self.templates:
                errors.append(f"Missing template: {name}")
                continue
            errors.extend(f"{name}: {error}" for error in self.validate_template_vars(self.templates[name], required))
        return errors


def _template_vars(template: str) -> Set[str]:
    """Placeholder names, ignoring format specifications such as {x:.3f}."""
    return {match.split(":")[0].strip() for match in re.findall(r"\{([^}]+)\}", template) if match.split(":")[0].strip()}


def load_templates(template_dir: Optional[str] = None) -> Dict[str, str]:
    return TemplateManager(template_dir).templates


def format_template(template: str, **kwargs) -> str:
    """Format a template string with variables (convenience function).

    Example:
        >>> format_template("tau: {tau}", tau=-1)
        'tau: -1'
    """
    return TemplateManager().format_template(template, **kwargs)
