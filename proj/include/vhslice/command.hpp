#pragma once

// Text command grammar (case-insensitive, whitespace-separated tokens):
//
//   cmd  := ("show" | "display") name
//         | "hide" name
//         | "highlight" name
//         | "unhighlight" (name | "all")
//         | "slice" ("axial" | "coronal" | "sagittal") number ["mm"]
//         | "move" "slice" signed-number ["mm"]
//         | "reset"
//         | "list"
//   name := one or more tokens, greedy to end of input
//   number := [+-]? digits [. digits?] | [+-]? . digits

#include "vhslice/session.hpp"
#include "vhslice/volume.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace vhs {

namespace cmd {

struct Show {
    std::string name;
    bool operator==(const Show&) const = default;
};
struct Hide {
    std::string name;
    bool operator==(const Hide&) const = default;
};
struct Highlight {
    std::string name;
    bool operator==(const Highlight&) const = default;
};
/// nullopt name means "all".
struct Unhighlight {
    std::optional<std::string> name;
    bool operator==(const Unhighlight&) const = default;
};
struct SlicePreset {
    Axis axis = Axis::Axial;
    double position_mm = 0.0;
    bool operator==(const SlicePreset&) const = default;
};
struct MovePlane {
    double offset_mm = 0.0;
    bool operator==(const MovePlane&) const = default;
};
struct Reset {
    bool operator==(const Reset&) const = default;
};
struct ListStructures {
    bool operator==(const ListStructures&) const = default;
};

} // namespace cmd

using CommandAst = std::variant<cmd::Show, cmd::Hide, cmd::Highlight, cmd::Unhighlight, cmd::SlicePreset,
                                cmd::MovePlane, cmd::Reset, cmd::ListStructures>;

struct ParseError {
    std::size_t position = 1; // 1-based token index; token count + 1 means end of input
    std::string expected;
    std::string found;        // "<end>" at end of input

    std::string message() const;
    bool operator==(const ParseError&) const = default;
};

using ParseResult = std::variant<CommandAst, ParseError>;

/// Total: never throws for any input text. Names in the AST are normalised.
ParseResult parse_command(std::string_view text);

/// Canonical text that parses back to an equal AST.
std::string format_command(const CommandAst& ast);

/// Lowercase and collapse runs of whitespace to single spaces, trimming ends.
std::string normalize_name(std::string_view name);

class SynonymTable {
public:
    /// Throws std::domain_error if the normalised alias is empty or already present.
    void add(std::string_view alias, std::uint16_t label_id);
    std::optional<std::uint16_t> find(std::string_view alias) const;
    std::size_t size() const { return aliases_.size(); }

private:
    std::map<std::string, std::uint16_t> aliases_;
};

/// Exact palette-name match first, then synonyms. No fuzzy matching.
std::optional<std::uint16_t> resolve_structure(std::string_view name, std::span<const PaletteEntry> palette,
                                               const SynonymTable& synonyms);

struct CommandOutcome {
    SessionState state;
    std::string message;
    bool ok = true;
    /// True when the change affects what a frame would show.
    bool changed = false;
};

/// Applies a command to a copy of `session`. Unknown structures leave the state
/// unchanged with ok = false. Throws std::domain_error for non-finite positions.
CommandOutcome apply_command(const CommandAst& command, const SessionState& session, const VolumeMeta& meta,
                             const SynonymTable& synonyms = {});

} // namespace vhs
