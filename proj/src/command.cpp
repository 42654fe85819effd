#include "vhslice/command.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vhs {

namespace {

constexpr const char* kEnd = "<end>";
constexpr const char* kExpectCommand = "command (show, display, hide, highlight, unhighlight, slice, move, reset, list)";
constexpr const char* kExpectAxis = "axis (axial, coronal, sagittal)";

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t n = 0;
    while (n < text.size()) {
        while (n < text.size() && std::isspace(static_cast<unsigned char>(text[n]))) {
            ++n;
        }
        const std::size_t start = n;
        while (n < text.size() && !std::isspace(static_cast<unsigned char>(text[n]))) {
            ++n;
        }
        if (n > start) {
            out.emplace_back(text.substr(start, n - start));
        }
    }
    return out;
}

std::optional<double> parse_number(const std::string& tok)
{
    std::size_t n = 0;
    if (n < tok.size() && (tok[n] == '+' || tok[n] == '-')) {
        ++n;
    }
    std::size_t digits = 0;
    while (n < tok.size() && std::isdigit(static_cast<unsigned char>(tok[n]))) {
        ++n;
        ++digits;
    }
    if (n < tok.size() && tok[n] == '.') {
        ++n;
        while (n < tok.size() && std::isdigit(static_cast<unsigned char>(tok[n]))) {
            ++n;
            ++digits;
        }
    }
    if (digits == 0 || n != tok.size()) {
        return std::nullopt;
    }
    const std::size_t skip = tok[0] == '+' ? 1 : 0;
    double value = 0.0;
    const auto res = std::from_chars(tok.data() + skip, tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    // Shortest form may use an exponent, which the grammar does not accept.
    if (s.find_first_of("eE") != std::string::npos) {
        std::ostringstream os;
        os.precision(17);
        os << std::fixed << v;
        s = os.str();
        while (s.size() > 1 && s.back() == '0') {
            s.pop_back();
        }
        if (!s.empty() && s.back() == '.') {
            s.pop_back();
        }
    }
    return s;
}

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    ParseResult run()
    {
        if (tokens_.empty()) {
            return error(kExpectCommand);
        }
        const std::string verb = lower(tokens_[0]);
        pos_ = 1;
        if (verb == "show" || verb == "display") {
            return name_command<cmd::Show>();
        }
        if (verb == "hide") {
            return name_command<cmd::Hide>();
        }
        if (verb == "highlight") {
            return name_command<cmd::Highlight>();
        }
        if (verb == "unhighlight") {
            if (pos_ + 1 == tokens_.size() && lower(tokens_[pos_]) == "all") {
                return CommandAst{cmd::Unhighlight{std::nullopt}};
            }
            auto name = rest_as_name();
            if (!name) {
                return error("structure name or 'all'");
            }
            return CommandAst{cmd::Unhighlight{std::move(*name)}};
        }
        if (verb == "slice") {
            if (at_end()) {
                return error(kExpectAxis);
            }
            const std::string axis_tok = lower(tokens_[pos_]);
            Axis axis;
            if (axis_tok == "axial") {
                axis = Axis::Axial;
            } else if (axis_tok == "coronal") {
                axis = Axis::Coronal;
            } else if (axis_tok == "sagittal") {
                axis = Axis::Sagittal;
            } else {
                return error(kExpectAxis);
            }
            ++pos_;
            double v = 0.0;
            if (auto e = number_with_unit(v)) {
                return *e;
            }
            return CommandAst{cmd::SlicePreset{axis, v}};
        }
        if (verb == "move") {
            if (at_end() || lower(tokens_[pos_]) != "slice") {
                return error("'slice'");
            }
            ++pos_;
            double v = 0.0;
            if (auto e = number_with_unit(v)) {
                return *e;
            }
            return CommandAst{cmd::MovePlane{v}};
        }
        if (verb == "reset" || verb == "list") {
            if (!at_end()) {
                return error("end of input");
            }
            if (verb == "reset") {
                return CommandAst{cmd::Reset{}};
            }
            return CommandAst{cmd::ListStructures{}};
        }
        pos_ = 0;
        return error(kExpectCommand);
    }

private:
    bool at_end() const { return pos_ >= tokens_.size(); }

    ParseError error(std::string expected) const
    {
        return {pos_ + 1, std::move(expected), at_end() ? std::string(kEnd) : tokens_[pos_]};
    }

    std::optional<std::string> rest_as_name()
    {
        if (at_end()) {
            return std::nullopt;
        }
        std::string joined;
        for (std::size_t n = pos_; n < tokens_.size(); ++n) {
            if (!joined.empty()) {
                joined += ' ';
            }
            joined += tokens_[n];
        }
        pos_ = tokens_.size();
        return normalize_name(joined);
    }

    template <class T>
    ParseResult name_command()
    {
        auto name = rest_as_name();
        if (!name) {
            return error("structure name");
        }
        return CommandAst{T{std::move(*name)}};
    }

    std::optional<ParseError> number_with_unit(double& out)
    {
        if (at_end()) {
            return error("number");
        }
        const auto v = parse_number(tokens_[pos_]);
        if (!v) {
            return error("number");
        }
        out = *v;
        ++pos_;
        if (!at_end() && lower(tokens_[pos_]) == "mm") {
            ++pos_;
            if (!at_end()) {
                return error("end of input");
            }
            return std::nullopt;
        }
        if (!at_end()) {
            return error("'mm' or end of input");
        }
        return std::nullopt;
    }

    std::vector<std::string> tokens_;
    std::size_t pos_ = 0;
};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

std::string ParseError::message() const
{
    return "parse error at token " + std::to_string(position) + ": expected " + expected + ", found '" + found + "'";
}

ParseResult parse_command(std::string_view text) { return Parser(text).run(); }

std::string format_command(const CommandAst& ast)
{
    return std::visit(Overloaded{
                          [](const cmd::Show& c) { return "show " + c.name; },
                          [](const cmd::Hide& c) { return "hide " + c.name; },
                          [](const cmd::Highlight& c) { return "highlight " + c.name; },
                          [](const cmd::Unhighlight& c) { return "unhighlight " + c.name.value_or("all"); },
                          [](const cmd::SlicePreset& c) {
                              return std::string("slice ") + axis_name(c.axis) + " " + format_number(c.position_mm) +
                                     " mm";
                          },
                          [](const cmd::MovePlane& c) { return "move slice " + format_number(c.offset_mm) + " mm"; },
                          [](const cmd::Reset&) { return std::string("reset"); },
                          [](const cmd::ListStructures&) { return std::string("list"); },
                      },
                      ast);
}

std::string normalize_name(std::string_view name)
{
    std::string out;
    for (const auto& tok : tokenize(name)) {
        if (!out.empty()) {
            out += ' ';
        }
        out += lower(tok);
    }
    return out;
}

void SynonymTable::add(std::string_view alias, std::uint16_t label_id)
{
    std::string key = normalize_name(alias);
    if (key.empty()) {
        throw std::domain_error("synonym alias must not be empty");
    }
    if (!aliases_.emplace(std::move(key), label_id).second) {
        throw std::domain_error("duplicate synonym alias '" + normalize_name(alias) + "'");
    }
}

std::optional<std::uint16_t> SynonymTable::find(std::string_view alias) const
{
    const auto it = aliases_.find(normalize_name(alias));
    if (it == aliases_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::uint16_t> resolve_structure(std::string_view name, std::span<const PaletteEntry> palette,
                                               const SynonymTable& synonyms)
{
    const std::string key = normalize_name(name);
    if (key.empty()) {
        return std::nullopt;
    }
    for (const auto& e : palette) {
        if (normalize_name(e.name) == key) {
            return e.id;
        }
    }
    return synonyms.find(key);
}

CommandOutcome apply_command(const CommandAst& command, const SessionState& session, const VolumeMeta& meta,
                             const SynonymTable& synonyms)
{
    CommandOutcome out{session, {}, true, false};

    auto resolve = [&](const std::string& name) -> std::optional<std::uint16_t> {
        auto id = resolve_structure(name, meta.palette, synonyms);
        if (!id) {
            out.ok = false;
            out.message = "unknown structure '" + name + "'";
        }
        return id;
    };
    auto palette_name = [&](std::uint16_t id) {
        const auto* e = meta.find_label(id);
        return e != nullptr ? e->name : std::to_string(id);
    };

    std::visit(Overloaded{
                   [&](const cmd::Show& c) {
                       if (const auto id = resolve(c.name)) {
                           out.state.hidden.erase(*id);
                           out.message = "showing " + palette_name(*id);
                           out.changed = true;
                       }
                   },
                   [&](const cmd::Hide& c) {
                       if (const auto id = resolve(c.name)) {
                           out.state.hidden.insert(*id);
                           out.message = "hiding " + palette_name(*id);
                           out.changed = true;
                       }
                   },
                   [&](const cmd::Highlight& c) {
                       if (const auto id = resolve(c.name)) {
                           out.state.highlighted.insert(*id);
                           out.message = "highlighting " + palette_name(*id);
                           out.changed = true;
                       }
                   },
                   [&](const cmd::Unhighlight& c) {
                       if (!c.name) {
                           out.state.highlighted.clear();
                           out.message = "cleared highlights";
                           out.changed = true;
                       } else if (const auto id = resolve(*c.name)) {
                           out.state.highlighted.erase(*id);
                           out.message = "unhighlighted " + palette_name(*id);
                           out.changed = true;
                       }
                   },
                   [&](const cmd::SlicePreset& c) {
                       if (!std::isfinite(c.position_mm)) {
                           throw std::domain_error("slice position must be finite");
                       }
                       out.state.plane = axis_preset(meta, c.axis, c.position_mm);
                       out.state.mode = ProbeMode::Plane;
                       out.message = std::string(axis_name(c.axis)) + " slice at " + format_number(c.position_mm) +
                                     " mm";
                       out.changed = true;
                   },
                   [&](const cmd::MovePlane& c) {
                       if (!std::isfinite(c.offset_mm)) {
                           throw std::domain_error("move offset must be finite");
                       }
                       out.state.plane.center += c.offset_mm * out.state.plane.normal();
                       out.message = "moved slice " + format_number(c.offset_mm) + " mm";
                       out.changed = true;
                   },
                   [&](const cmd::Reset&) {
                       out.state = reset_session(session, meta);
                       out.message = "reset";
                       out.changed = true;
                   },
                   [&](const cmd::ListStructures&) {
                       std::string names;
                       for (const auto& e : meta.palette) {
                           if (!names.empty()) {
                               names += ", ";
                           }
                           names += e.name;
                       }
                       out.message = "structures: " + names;
                   },
               },
               command);
    return out;
}

} // namespace vhs
