#include "docrepair/pruner.hpp"

namespace docrepair {

std::string placeholder_for(Language language, std::string_view signature) {
    const std::string comment = language == Language::python ? "#" : "//";
    return comment + " … " + collapse_whitespace(signature) + " elided …";
}

PrunedFile prune_file(const RepoSnapshot& snapshot, const std::string& path,
                      const std::vector<std::string>& localized, bool enabled) {
    const SourceFile& file = snapshot.file(path);
    static const std::vector<CodeUnit> kNoUnits;
    static const std::vector<PreambleItem> kNoPreamble;
    const auto uit = snapshot.units.find(path);
    const auto& units = uit == snapshot.units.end() ? kNoUnits : uit->second;
    const auto pit = snapshot.preamble.find(path);
    const auto& preamble = pit == snapshot.preamble.end() ? kNoPreamble : pit->second;

    std::set<std::string> top;
    for (const auto& u : units)
        if (u.top_level()) top.insert(u.name);

    std::set<std::string> roots;
    for (const auto& name : localized) {
        if (top.count(name)) {
            roots.insert(name);
            continue;
        }
        bool matched = false;
        const auto dot = name.rfind('.');
        for (const auto& u : units) {
            if (!u.parent) continue;
            const bool qualified = dot != std::string::npos && name.substr(0, dot) == *u.parent &&
                                   name.substr(dot + 1) == u.name;
            if (qualified || name == u.name) {
                roots.insert(*u.parent);
                matched = true;
            }
        }
        if (!matched) throw UnknownUnit(path + ": no unit named " + name);
    }

    PrunedFile out;
    out.path = path;
    const auto lines = split_lines_keep(file.content);

    if (!enabled) {
        out.text = file.content;
        out.kept_units = top;
        for (std::size_t i = 0; i < lines.size(); ++i) out.line_map.push_back(static_cast<int>(i) + 1);
        return out;
    }

    out.kept_units = roots;
    for (const auto& u : units)
        if (u.top_level() && roots.count(u.name))
            for (const auto& ref : static_references(units, u)) out.kept_units.insert(ref);

    int pruned_line = 0;
    auto keep = [&](const Span& span) {
        for (int l = span.start_line; l <= span.end_line; ++l) {
            out.text += lines[static_cast<std::size_t>(l - 1)];
            out.line_map.push_back(l);
            ++pruned_line;
        }
    };
    for (const auto& seg : segment_file(ParsedFile{units, preamble}, static_cast<int>(lines.size()))) {
        if (seg.kind != SegmentKind::unit || out.kept_units.count(seg.unit_name)) {
            keep(seg.span);
            continue;
        }
        const CodeUnit* unit = nullptr;
        for (const auto& u : units)
            if (u.top_level() && u.span.start_line == seg.span.start_line) unit = &u;
        ElidedSpan el;
        el.span = seg.span;
        el.original_text = slice_lines(file.content, seg.span);
        el.placeholder = placeholder_for(file.language, unit ? unit->signature : seg.unit_name);
        el.placeholder_line = ++pruned_line;
        out.text += el.placeholder;
        if (el.original_text.ends_with('\n')) out.text += '\n';
        out.line_map.push_back(0);
        out.elided_spans.push_back(std::move(el));
    }
    return out;
}

std::string restore(const PrunedFile& pruned) {
    const auto lines = split_lines_keep(pruned.text);
    std::string out;
    std::size_t next = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int line_no = static_cast<int>(i) + 1;
        if (next < pruned.elided_spans.size() && pruned.elided_spans[next].placeholder_line == line_no) {
            out += pruned.elided_spans[next].original_text;
            ++next;
        } else {
            out += lines[i];
        }
    }
    return out;
}

}  // namespace docrepair
