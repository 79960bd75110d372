"""
Report Renderer Service - Render campaign summaries as Markdown reports
"""
import json
from typing import Any

from jinja2 import BaseLoader, Environment, StrictUndefined, TemplateSyntaxError, UndefinedError

from core.exceptions import UsageError


CAMPAIGN_REPORT = """# Campaign report: {{ experiment }}

Version {{ version }}, base seed {{ config.base_seed }}, {{ config.replicas }} replicas per combination.
Overall: **{{ "PASS" if passed else "FAIL" }}**

## Rules

| rule | status | value | target |
|------|--------|-------|--------|
{% for rule in rules -%}
| {{ rule.name }} | {{ rule.status }} | {{ rule.value | format_number }} | {{ rule.target }}{% if rule.note is defined %} ({{ rule.note }}){% endif %} |
{% endfor %}
{% if fits %}
## Exponent fits

{% for fit in fits -%}
### {{ fit.name }}

slope {{ fit.slope | format_number }} +/- {{ fit.stderr | format_number }}, R^2 {{ fit.r_squared | format_number }}

| t | residual | predicted log factor |
|---|----------|----------------------|
{% for row in fit.residuals -%}
| {{ row.t | format_number }} | {{ row.residual | format_number }} | {{ row.log_factor | format_number }} |
{% endfor %}
{% endfor -%}
{% endif %}
{% if tails %}
## Tails

{% for tail in tails -%}
- {{ tail.name }} ({{ tail.side }}): exponent {{ tail.fitted_outer_exponent | format_number }} over {{ tail.thresholds | length }} thresholds
{% endfor %}
{% endif %}
{% if distances %}
## KS distances

{% for d in distances -%}
- {{ d.name }}: {{ d.value | format_number }}
{% endfor %}
{% endif %}
## Configuration

```json
{{ config | json_pretty }}
```
"""


class ReportRenderer:
    """Render Jinja2 templates over campaign summaries"""

    def __init__(self):
        self.env = Environment(
            loader=BaseLoader(),
            autoescape=False,
            undefined=StrictUndefined,
            trim_blocks=False
        )

        # Add custom filters
        self.env.filters["format_number"] = self._format_number
        self.env.filters["json_pretty"] = self._json_pretty

    def render(self, template: str, data: dict[str, Any]) -> str:
        """Render template with data"""
        try:
            tpl = self.env.from_string(template)
            return tpl.render(**data)
        except TemplateSyntaxError as e:
            raise UsageError(f"Template syntax error at line {e.lineno}: {e.message}") from e
        except UndefinedError as e:
            raise UsageError(f"Missing report data: {e.message}") from e

    def render_campaign(self, summary: dict[str, Any], template: str = CAMPAIGN_REPORT) -> str:
        """Markdown report for one campaign summary"""
        return self.render(template, summary)

    # Custom filters
    @staticmethod
    def _format_number(value, significant: int = 4) -> str:
        """Fixed significant digits; missing values as a dash"""
        if value is None:
            return "-"
        try:
            return f"{float(value):.{significant}g}"
        except (ValueError, TypeError):
            return str(value)

    @staticmethod
    def _json_pretty(value, indent: int = 2) -> str:
        """Pretty print JSON"""
        try:
            return json.dumps(value, indent=indent, ensure_ascii=False, sort_keys=True)
        except (ValueError, TypeError):
            return str(value)
