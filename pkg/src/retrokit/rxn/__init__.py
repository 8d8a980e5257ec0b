"""Reactions: data model, center labeling, synthons, semi-templates."""

from .centers import (CenterLabel, Synthon, break_into_synthons, centers_to_targets,
                      label_centers, synthons_for_reaction)
from .reaction import (Reaction, ReactionError, iter_dataset, parse_reaction,
                       read_dataset, write_dataset)
from .templates import (SemiTemplate, TemplateApplyError, TemplateError,
                        TemplateLibrary, apply_semi_template,
                        build_template_library, extract_reaction_templates,
                        extract_semi_template, template_key)

__all__ = [
    "CenterLabel", "Reaction", "ReactionError", "SemiTemplate", "Synthon",
    "TemplateApplyError", "TemplateError", "TemplateLibrary",
    "apply_semi_template", "break_into_synthons", "build_template_library",
    "centers_to_targets", "extract_reaction_templates", "extract_semi_template",
    "iter_dataset", "label_centers", "parse_reaction", "read_dataset",
    "synthons_for_reaction", "template_key", "write_dataset",
]
