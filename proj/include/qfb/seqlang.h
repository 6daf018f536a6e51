// Copyright 2026 The qfeedback Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Line-oriented pulse-sequence language (.seq files).
//
//   sequence  := (setting | stmt)*            one per line, '#' comments
//   setting   := "set" identifier "=" value
//   value     := number [unit] | identifier
//   stmt      := "pulse" "x" (angle | "for" time) ["at" time]
//              | "wait" time ["selective"]
//              | "readout" ("on" | "off")
//              | "measure"
//
// Numbers take decimal or exponent notation. Units: ns us s (time),
// deg rad (angle), MHz GHz (cyclic frequency). Times and angles are stored
// in seconds and radians, frequencies in Hz.

#ifndef QFB_SEQLANG_H
#define QFB_SEQLANG_H

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qfb/protocol.h"

namespace qfb::seq {

struct Position {
    int line = 1;
    int column = 1;

    bool operator==(const Position &) const = default;
    std::string str() const;
};

enum class TokenKind { Keyword, Number, Unit, Identifier, Punctuation };

const char *to_string(TokenKind k);

struct Token {
    TokenKind kind;
    std::string lexeme;
    Position position;
};

class ParseError : public std::runtime_error {
   public:
    ParseError(Position position, std::string message, std::vector<TokenKind> expected = {},
               std::vector<Position> related = {});

    const Position &position() const { return position_; }
    /// Message without the leading position.
    const std::string &message() const { return message_; }
    const std::vector<TokenKind> &expected() const { return expected_; }
    /// Other source locations involved, e.g. the first of two overlapping pulses.
    const std::vector<Position> &related() const { return related_; }

   private:
    Position position_;
    std::string message_;
    std::vector<TokenKind> expected_;
    std::vector<Position> related_;
};

/// Throws ParseError at the first character that cannot start a token.
std::vector<Token> tokenize(std::string_view source);

enum class Dimension { None, Time, Angle, Frequency };

struct Quantity {
    double value = 0;
    Dimension dimension = Dimension::None;

    bool operator==(const Quantity &) const = default;
};

using SettingValue = std::variant<Quantity, std::string>;

struct Setting {
    std::string key;
    SettingValue value;
    Position position;
};

enum class StmtKind { Pulse, Wait, ReadoutOn, ReadoutOff, Measure };

struct Statement {
    StmtKind kind = StmtKind::Measure;
    /// Pulse rotation angle in radians (unless by_duration).
    double angle = 0;
    /// Wait length, or pulse length when by_duration, in seconds.
    double duration = 0;
    bool by_duration = false;
    /// Explicit pulse start time in seconds.
    std::optional<double> at;
    bool selective = false;
    Position position;
};

struct SequenceDoc {
    std::vector<Setting> settings;
    std::vector<Statement> statements;
};

/// Structural equality ignoring source positions; numbers compared to a
/// relative 1e-12.
bool equivalent(const SequenceDoc &a, const SequenceDoc &b);

SequenceDoc parse(std::string_view source);

/// Canonical text: settings then statements, one per line, times in ns,
/// angles in deg, frequencies in MHz, 6 significant digits, LF endings.
std::string serialize(const SequenceDoc &doc);

/// Applies settings to a copy of `device` and lays statements out back to
/// back. Throws ParseError (with source positions) for unknown settings and
/// any schedule-invariant violation.
PulseSchedule lower(const SequenceDoc &doc, const DeviceParams &device);

/// Document that lowers (against `base`) to `schedule`. Settings are emitted
/// only for device fields that differ from `base`.
SequenceDoc to_document(const PulseSchedule &schedule, const DeviceParams &base);

/// Parses a single quantity such as "90deg", "1.5rad", "5.5ns". A bare
/// number takes `bare_unit`.
Quantity parse_quantity(std::string_view text, Dimension bare_unit = Dimension::None);

}  // namespace qfb::seq

#endif
