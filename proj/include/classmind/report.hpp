#pragma once

#include <optional>
#include <string>

#include "classmind/annotations.hpp"
#include "classmind/ava_align.hpp"

namespace classmind::report {

std::string html_escape(std::string_view s);

// Single self-contained HTML document (inline CSS, no external assets).
std::string render_html(const std::string& title, const ava::FeedbackReport& feedback,
                        const std::optional<annotations::AnnotationSet>& annotations);

}  // namespace classmind::report
