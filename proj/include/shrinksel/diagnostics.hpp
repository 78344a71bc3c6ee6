#pragma once

#include <functional>
#include <string>

namespace shrinksel {

using WarningSink = std::function<void(const std::string&)>;

/// Emits a non-fatal diagnostic. Default sink prints "warning: ..." to stderr.
void warn(const std::string& message);

/// Replaces the sink and returns the previous one. An empty sink restores the default.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace shrinksel
