#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace docrepair {

/// Replaces every {{key}} with vars[key]. Unknown keys throw ConfigError.
std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& vars);

/// Prompt templates by name. Defaults are built in; a directory of
/// <name>.txt files overrides individual entries.
class PromptSet {
public:
    PromptSet();
    static PromptSet with_overrides(const std::filesystem::path& dir);

    const std::string& get(const std::string& name) const;
    void set(const std::string& name, std::string text);

    std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace docrepair
