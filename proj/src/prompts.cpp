#include "docrepair/prompts.hpp"

#include "docrepair/common.hpp"

namespace docrepair {

namespace {

const char* kFunctionDoc = R"(You are documenting one code unit of a software repository.

File: {{path}}
Unit: {{unit_name}}
Signature: {{signature}}
Enclosing context: {{context}}
Units it depends on: {{dependencies}}

Complete source code of the unit:
```
{{source}}
```

Write the documentation using exactly these four section headers, each on its own line, in this order. Write "none" for a section with nothing to say.
### PARAMETERS
### DESCRIPTION
### USAGE NOTES
### OUTPUT EXAMPLES
)";

const char* kFileDoc = R"(You are documenting one file of a software repository.

File: {{path}}

Repository structure (the current file is marked):
{{tree}}

Module-level imports and globals:
```
{{preamble}}
```

Function-level documentation of every unit in the file:
{{unit_docs}}

For each unit listed above write a one-paragraph summary under a header line "### SUMMARY <unit name>".
Then describe the architectural role of the file within the repository under the header line "### ARCHITECTURAL ROLE".
)";

const char* kTextualize = R"(An issue was reported against a software repository. It includes {{image_count}} image(s) showing the problem.

Title: {{title}}

{{body}}

Describe in plain text everything the images and the report show: the observed behavior, the expected behavior, all possible error behaviors, and their likely root causes in the code. Your description will be used to search the repository.
)";

const char* kFileLocalization = R"(The following issue was reported against a software repository.

Issue:
{{query}}

Candidate files:
{{candidates}}
{{excluded}}
Select at most {{k}} files that most likely need to be edited to resolve the issue, most suspicious first.
Answer with the line "SUSPICIOUS FILES:" followed by one file path per line, copied exactly from the candidates.
)";

const char* kUnitLocalization = R"(The following issue was reported against a software repository.

Issue:
{{query}}

File: {{path}}

Code units in this file:
{{units}}

Select every function or class in this file that needs to be inspected or edited to resolve the issue.
Answer with the line "RELEVANT UNITS:" followed by one unit name per line, copied exactly from the list. Answer with the header alone if none apply.
)";

const char* kRepair = R"(The following issue was reported against a software repository.

Issue:
{{query}}

Relevant code from {{path}} (unrelated code units are elided):
```
{{code}}
```

Fix the issue by editing {{path}}. Write each edit in this exact format:
{{path}}
<<<<<<< SEARCH
lines copied exactly from the file
=======
replacement lines
>>>>>>> REPLACE

The SEARCH part must match the original file exactly, including indentation, and must be unique within the file.
)";

}  // namespace

std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const std::size_t open = tpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        const std::size_t close = tpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, open - pos));
        const std::string key(trim(tpl.substr(open + 2, close - open - 2)));
        auto it = vars.find(key);
        if (it == vars.end()) throw ConfigError("template variable not provided: " + key);
        out += it->second;
        pos = close + 2;
    }
    return out;
}

PromptSet::PromptSet()
    : templates_{{"function_doc", kFunctionDoc},         {"file_doc", kFileDoc},
                 {"textualize", kTextualize},            {"file_localization", kFileLocalization},
                 {"unit_localization", kUnitLocalization}, {"repair", kRepair}} {}

PromptSet PromptSet::with_overrides(const std::filesystem::path& dir) {
    PromptSet set;
    if (!std::filesystem::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir.string());
    for (const auto& [name, _] : PromptSet().templates_) {
        const auto file = dir / (name + ".txt");
        if (std::filesystem::exists(file)) set.set(name, read_file(file));
    }
    return set;
}

const std::string& PromptSet::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
    return it->second;
}

void PromptSet::set(const std::string& name, std::string text) { templates_[name] = std::move(text); }

std::string PromptSet::render(const std::string& name, const std::map<std::string, std::string>& vars) const {
    return render_template(get(name), vars);
}

}  // namespace docrepair
