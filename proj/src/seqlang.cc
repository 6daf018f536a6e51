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

#include "qfb/seqlang.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace qfb::seq {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::string_view, 10> kKeywords = {
    "pulse", "wait", "readout", "measure", "set", "on", "off", "for", "at", "selective",
};

struct UnitInfo {
    std::string_view name;
    Dimension dimension;
    double scale;
};

constexpr std::array<UnitInfo, 7> kUnits = {{
    {"ns", Dimension::Time, 1e-9},
    {"us", Dimension::Time, 1e-6},
    {"s", Dimension::Time, 1.0},
    {"MHz", Dimension::Frequency, 1e6},
    {"GHz", Dimension::Frequency, 1e9},
    {"deg", Dimension::Angle, kPi / 180},
    {"rad", Dimension::Angle, 1.0},
}};

const UnitInfo *find_unit(std::string_view name) {
    for (const auto &u : kUnits) {
        if (u.name == name) {
            return &u;
        }
    }
    return nullptr;
}

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

const char *dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Time:
            return "time (ns, us, s)";
        case Dimension::Angle:
            return "angle (deg, rad)";
        case Dimension::Frequency:
            return "frequency (MHz, GHz)";
        case Dimension::None:
            break;
    }
    return "dimensionless number";
}

// Degrees <-> radians through one formula so round trips stay bit-stable.
double deg_to_rad(double deg) {
    return deg * (kPi / 180);
}

double rad_to_deg(double rad) {
    return rad / (kPi / 180);
}

std::string fmt_number(double v) {
    if (v == 0) {
        v = 0;  // drop the sign of -0
    }
    return fmt::format("{:.6g}", v);
}

bool same_number(double a, double b) {
    return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

std::string Position::str() const {
    return std::to_string(line) + ":" + std::to_string(column);
}

const char *to_string(TokenKind k) {
    switch (k) {
        case TokenKind::Keyword:
            return "keyword";
        case TokenKind::Number:
            return "number";
        case TokenKind::Unit:
            return "unit";
        case TokenKind::Identifier:
            return "identifier";
        case TokenKind::Punctuation:
            return "punctuation";
    }
    return "?";
}

ParseError::ParseError(Position position, std::string message, std::vector<TokenKind> expected,
                       std::vector<Position> related)
    : std::runtime_error(position.str() + ": " + message),
      position_(position),
      message_(std::move(message)),
      expected_(std::move(expected)),
      related_(std::move(related)) {
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    Position pos;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; k++, i++) {
            if (src[i] == '\n') {
                pos.line++;
                pos.column = 1;
            } else {
                pos.column++;
            }
        }
    };
    auto digit_at = [&](size_t k) { return k < src.size() && std::isdigit(static_cast<unsigned char>(src[k])); };

    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '#') {
            size_t end = src.find('\n', i);
            advance((end == std::string_view::npos ? src.size() : end) - i);
            continue;
        }
        Position start = pos;
        size_t j = i;
        bool signed_number = (c == '+' || c == '-') && (digit_at(j + 1) || (src.size() > j + 1 && src[j + 1] == '.' && digit_at(j + 2)));
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && digit_at(j + 1)) || signed_number) {
            if (signed_number) {
                j++;
            }
            while (digit_at(j)) {
                j++;
            }
            if (j < src.size() && src[j] == '.') {
                j++;
                while (digit_at(j)) {
                    j++;
                }
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) {
                    k++;
                }
                if (digit_at(k)) {
                    j = k;
                    while (digit_at(j)) {
                        j++;
                    }
                }
            }
            out.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), start});
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
                j++;
            }
            std::string word(src.substr(i, j - i));
            TokenKind kind = TokenKind::Identifier;
            if (is_keyword(word)) {
                kind = TokenKind::Keyword;
            } else if (find_unit(word)) {
                kind = TokenKind::Unit;
            }
            out.push_back({kind, std::move(word), start});
            advance(j - i);
            continue;
        }
        if (c == '=') {
            out.push_back({TokenKind::Punctuation, "=", start});
            advance(1);
            continue;
        }
        std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c)
                                                                         : fmt::format("\\x{:02x}", static_cast<unsigned char>(c));
        throw ParseError(start, "unexpected character '" + shown + "'");
    }
    return out;
}

namespace {

class Parser {
   public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    SequenceDoc run() {
        SequenceDoc doc;
        int last_line = 0;
        while (!at_end()) {
            const Token &first = peek();
            if (first.position.line == last_line) {
                throw ParseError(first.position, "expected end of line before '" + first.lexeme + "'");
            }
            if (first.kind == TokenKind::Keyword && first.lexeme == "set") {
                Setting s = parse_setting();
                for (const auto &prev : doc.settings) {
                    if (prev.key == s.key) {
                        throw ParseError(s.position, "duplicate setting '" + s.key + "'", {}, {prev.position});
                    }
                }
                doc.settings.push_back(std::move(s));
            } else {
                doc.statements.push_back(parse_statement());
            }
            last_line = toks_[idx_ - 1].position.line;
        }
        return doc;
    }

   private:
    bool at_end() const { return idx_ >= toks_.size(); }

    const Token &peek() const { return toks_[idx_]; }

    Position here() const {
        if (!at_end()) {
            return peek().position;
        }
        if (toks_.empty()) {
            return {};
        }
        const Token &t = toks_.back();
        return {t.position.line, t.position.column + static_cast<int>(t.lexeme.size())};
    }

    [[noreturn]] void fail(const std::string &what, std::vector<TokenKind> expected) const {
        std::string found = at_end() ? "end of input" : "'" + peek().lexeme + "'";
        throw ParseError(here(), "expected " + what + ", found " + found, std::move(expected));
    }

    bool accept_keyword(std::string_view kw) {
        if (!at_end() && peek().kind == TokenKind::Keyword && peek().lexeme == kw) {
            idx_++;
            return true;
        }
        return false;
    }

    bool on_same_line(int line) const { return !at_end() && peek().position.line == line; }

    const Token &expect(TokenKind kind, const std::string &what) {
        if (at_end() || peek().kind != kind) {
            fail(what, {kind});
        }
        return toks_[idx_++];
    }

    // number [unit]
    Quantity quantity(Dimension want, bool unit_required, Position &where) {
        const Token &num = expect(TokenKind::Number, "a number");
        where = num.position;
        double v = 0;
        auto [ptr, ec] = std::from_chars(num.lexeme.data() + (num.lexeme[0] == '+' ? 1 : 0),
                                         num.lexeme.data() + num.lexeme.size(), v);
        if (ec != std::errc() || ptr != num.lexeme.data() + num.lexeme.size() || !std::isfinite(v)) {
            throw ParseError(num.position, "malformed number '" + num.lexeme + "'");
        }
        if (!at_end() && peek().kind == TokenKind::Unit && peek().position.line == num.position.line) {
            const Token &u = toks_[idx_++];
            const UnitInfo *info = find_unit(u.lexeme);
            if (want != Dimension::None && info->dimension != want) {
                throw ParseError(u.position, "expected a " + std::string(dimension_name(want)) + " unit, found '" +
                                                 u.lexeme + "'",
                                 {TokenKind::Unit});
            }
            return {info->dimension == Dimension::Angle && info->scale != 1.0 ? deg_to_rad(v) : v * info->scale,
                    info->dimension};
        }
        if (unit_required) {
            fail("a " + std::string(dimension_name(want)) + " unit", {TokenKind::Unit});
        }
        return {v, Dimension::None};
    }

    double duration(const char *what) {
        Position where;
        Quantity q = quantity(Dimension::Time, true, where);
        if (q.value < 0) {
            throw ParseError(where, std::string("negative ") + what + " is not allowed");
        }
        return q.value;
    }

    Setting parse_setting() {
        Setting s;
        s.position = toks_[idx_++].position;
        s.key = expect(TokenKind::Identifier, "a setting name").lexeme;
        expect(TokenKind::Punctuation, "'='");
        if (!at_end() && peek().kind == TokenKind::Identifier) {
            s.value = toks_[idx_++].lexeme;
        } else if (!at_end() && peek().kind == TokenKind::Number) {
            Position where;
            s.value = quantity(Dimension::None, false, where);
        } else {
            fail("a number or identifier", {TokenKind::Number, TokenKind::Identifier});
        }
        return s;
    }

    Statement parse_statement() {
        if (at_end() || peek().kind != TokenKind::Keyword) {
            fail("a statement (pulse, wait, readout, measure, set)", {TokenKind::Keyword});
        }
        const Token &kw = toks_[idx_++];
        Statement st;
        st.position = kw.position;
        int line = kw.position.line;
        if (kw.lexeme == "pulse") {
            st.kind = StmtKind::Pulse;
            const Token &axis = expect(TokenKind::Identifier, "a rotation axis");
            if (axis.lexeme != "x") {
                throw ParseError(axis.position, "unsupported rotation axis '" + axis.lexeme + "' (only x)");
            }
            if (accept_keyword("for")) {
                st.by_duration = true;
                st.duration = duration("pulse length");
            } else {
                Position where;
                st.angle = quantity(Dimension::Angle, true, where).value;
            }
            if (on_same_line(line) && accept_keyword("at")) {
                st.at = duration("start time");
            }
        } else if (kw.lexeme == "wait") {
            st.kind = StmtKind::Wait;
            st.duration = duration("duration");
            if (on_same_line(line) && accept_keyword("selective")) {
                st.selective = true;
            }
        } else if (kw.lexeme == "readout") {
            if (accept_keyword("on")) {
                st.kind = StmtKind::ReadoutOn;
            } else if (accept_keyword("off")) {
                st.kind = StmtKind::ReadoutOff;
            } else {
                fail("'on' or 'off'", {TokenKind::Keyword});
            }
        } else if (kw.lexeme == "measure") {
            st.kind = StmtKind::Measure;
        } else {
            idx_--;
            fail("a statement (pulse, wait, readout, measure, set)", {TokenKind::Keyword});
        }
        return st;
    }

    std::vector<Token> toks_;
    size_t idx_ = 0;
};

}  // namespace

SequenceDoc parse(std::string_view source) {
    return Parser(tokenize(source)).run();
}

bool equivalent(const SequenceDoc &a, const SequenceDoc &b) {
    if (a.settings.size() != b.settings.size() || a.statements.size() != b.statements.size()) {
        return false;
    }
    for (size_t k = 0; k < a.settings.size(); k++) {
        const auto &x = a.settings[k];
        const auto &y = b.settings[k];
        if (x.key != y.key || x.value.index() != y.value.index()) {
            return false;
        }
        if (const auto *qx = std::get_if<Quantity>(&x.value)) {
            const auto &qy = std::get<Quantity>(y.value);
            if (qx->dimension != qy.dimension || !same_number(qx->value, qy.value)) {
                return false;
            }
        } else if (std::get<std::string>(x.value) != std::get<std::string>(y.value)) {
            return false;
        }
    }
    for (size_t k = 0; k < a.statements.size(); k++) {
        const auto &x = a.statements[k];
        const auto &y = b.statements[k];
        if (x.kind != y.kind || x.by_duration != y.by_duration || x.selective != y.selective ||
            x.at.has_value() != y.at.has_value() || !same_number(x.angle, y.angle) ||
            !same_number(x.duration, y.duration) || (x.at && !same_number(*x.at, *y.at))) {
            return false;
        }
    }
    return true;
}

namespace {

std::string fmt_time(double seconds) {
    return fmt_number(seconds * 1e9) + "ns";
}

std::string fmt_value(const SettingValue &v) {
    if (const auto *s = std::get_if<std::string>(&v)) {
        return *s;
    }
    const auto &q = std::get<Quantity>(v);
    switch (q.dimension) {
        case Dimension::Time:
            return fmt_time(q.value);
        case Dimension::Angle:
            return fmt_number(rad_to_deg(q.value)) + "deg";
        case Dimension::Frequency:
            return fmt_number(q.value / 1e6) + "MHz";
        case Dimension::None:
            break;
    }
    return fmt_number(q.value);
}

}  // namespace

std::string serialize(const SequenceDoc &doc) {
    std::string out;
    for (const auto &s : doc.settings) {
        out += "set " + s.key + " = " + fmt_value(s.value) + "\n";
    }
    for (const auto &st : doc.statements) {
        switch (st.kind) {
            case StmtKind::Pulse:
                out += "pulse x ";
                out += st.by_duration ? "for " + fmt_time(st.duration) : fmt_number(rad_to_deg(st.angle)) + "deg";
                if (st.at) {
                    out += " at " + fmt_time(*st.at);
                }
                break;
            case StmtKind::Wait:
                out += "wait " + fmt_time(st.duration);
                if (st.selective) {
                    out += " selective";
                }
                break;
            case StmtKind::ReadoutOn:
                out += "readout on";
                break;
            case StmtKind::ReadoutOff:
                out += "readout off";
                break;
            case StmtKind::Measure:
                out += "measure";
                break;
        }
        out += "\n";
    }
    return out;
}

namespace {

enum class Field { Angular, Cyclic, Time, Plain };

struct SettingSpec {
    Field field;
    double DeviceParams::*direct = nullptr;
    double JbaParams::*jba = nullptr;
    std::optional<double> DeviceParams::*optional = nullptr;
};

const std::map<std::string, SettingSpec, std::less<>> &setting_table() {
    static const std::map<std::string, SettingSpec, std::less<>> table = {
        {"omega_qubit", {Field::Angular, &DeviceParams::omega_qubit}},
        {"qubit_gap", {Field::Angular, &DeviceParams::qubit_gap}},
        {"rabi_omega", {Field::Angular, &DeviceParams::rabi_omega}},
        {"f_jba", {Field::Cyclic, nullptr, &JbaParams::f_jba}},
        {"q_factor", {Field::Plain, nullptr, &JbaParams::q_factor}},
        {"delta_high", {Field::Angular, nullptr, &JbaParams::delta_high}},
        {"delta_low", {Field::Angular, nullptr, &JbaParams::delta_low}},
        {"projection_error", {Field::Plain, nullptr, &JbaParams::projection_error}},
        {"assignment_error", {Field::Plain, nullptr, &JbaParams::assignment_error}},
        {"t1", {Field::Time, nullptr, nullptr, &DeviceParams::t1}},
        {"t2", {Field::Time, nullptr, nullptr, &DeviceParams::t2}},
    };
    return table;
}

Dimension field_dimension(Field f) {
    switch (f) {
        case Field::Angular:
        case Field::Cyclic:
            return Dimension::Frequency;
        case Field::Time:
            return Dimension::Time;
        case Field::Plain:
            break;
    }
    return Dimension::None;
}

double quantity_for(const Setting &s, Field f) {
    const auto *q = std::get_if<Quantity>(&s.value);
    Dimension want = field_dimension(f);
    if (!q || q->dimension != want) {
        throw ParseError(s.position, "setting '" + s.key + "' expects a " + dimension_name(want));
    }
    return f == Field::Angular ? kTwoPi * q->value : q->value;
}

void apply_setting(const Setting &s, DeviceParams &dev, DriveConvention &conv) {
    if (s.key == "drive_convention") {
        const auto *name = std::get_if<std::string>(&s.value);
        if (name && *name == "resonant_with_low") {
            conv = DriveConvention::ResonantWithLow;
        } else if (name && *name == "resonant_with_high") {
            conv = DriveConvention::ResonantWithHigh;
        } else {
            throw ParseError(s.position, "drive_convention must be resonant_with_low or resonant_with_high");
        }
        return;
    }
    if (s.key == "delta_omega") {
        dev.jba.delta_high = dev.jba.delta_low + quantity_for(s, Field::Angular);
        return;
    }
    auto it = setting_table().find(s.key);
    if (it == setting_table().end()) {
        throw ParseError(s.position, "unknown setting '" + s.key + "'");
    }
    const SettingSpec &spec = it->second;
    double v = quantity_for(s, spec.field);
    if (spec.direct) {
        dev.*spec.direct = v;
    } else if (spec.jba) {
        dev.jba.*spec.jba = v;
    } else {
        dev.*spec.optional = v;
    }
}

}  // namespace

PulseSchedule lower(const SequenceDoc &doc, const DeviceParams &device) {
    DeviceParams dev = device;
    DriveConvention conv = DriveConvention::ResonantWithLow;
    for (const auto &s : doc.settings) {
        apply_setting(s, dev, conv);
    }
    try {
        dev.validate();
    } catch (const std::invalid_argument &e) {
        Position where = doc.settings.empty() ? Position{} : doc.settings.front().position;
        throw ParseError(where, std::string("invalid device settings: ") + e.what());
    }

    std::vector<PulseEvent> events;
    std::vector<size_t> origin;
    double now = 0;
    for (size_t k = 0; k < doc.statements.size(); k++) {
        const Statement &st = doc.statements[k];
        PulseEvent e;
        e.start = now;
        switch (st.kind) {
            case StmtKind::Pulse:
                e.kind = EventKind::XRotation;
                e.angle = st.by_duration ? dev.rabi_omega * st.duration : st.angle;
                e.duration = std::abs(e.angle) / dev.rabi_omega;
                if (st.at) {
                    e.start = *st.at;
                }
                break;
            case StmtKind::Wait:
                e.kind = EventKind::Wait;
                e.duration = st.duration;
                e.selective = st.selective;
                break;
            case StmtKind::ReadoutOn:
                e.kind = EventKind::ReadoutOn;
                e.duration = dev.jba.tau_jba();
                break;
            case StmtKind::ReadoutOff:
                e.kind = EventKind::ReadoutOff;
                break;
            case StmtKind::Measure:
                e.kind = EventKind::Measure;
                break;
        }
        now = std::max(now, e.end());
        events.push_back(e);
        origin.push_back(k);
    }

    // Explicit start times may reorder pulses; keep the event list time-sorted.
    std::vector<size_t> order(events.size());
    for (size_t k = 0; k < order.size(); k++) {
        order[k] = k;
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return events[a].start < events[b].start; });
    std::vector<PulseEvent> sorted;
    std::vector<size_t> sorted_origin;
    for (size_t k : order) {
        sorted.push_back(events[k]);
        sorted_origin.push_back(origin[k]);
    }

    try {
        return PulseSchedule(std::move(sorted), dev, conv);
    } catch (const ScheduleError &e) {
        std::vector<Position> where;
        for (size_t ev : e.events()) {
            where.push_back(doc.statements[sorted_origin[ev]].position);
        }
        std::sort(where.begin(), where.end(),
                  [](const Position &a, const Position &b) { return std::tie(a.line, a.column) < std::tie(b.line, b.column); });
        // Report at the later statement and cite the earlier one.
        Position primary = where.back();
        where.pop_back();
        std::string msg = e.what();
        if (!where.empty()) {
            msg += " (see " + where.front().str() + ")";
        }
        throw ParseError(primary, msg, {}, where);
    }
}

SequenceDoc to_document(const PulseSchedule &schedule, const DeviceParams &base) {
    SequenceDoc doc;
    const DeviceParams &dev = schedule.device();
    auto freq = [](double angular) { return Quantity{angular / kTwoPi, Dimension::Frequency}; };
    if (schedule.convention() != DriveConvention::ResonantWithLow) {
        doc.settings.push_back({"drive_convention", std::string(to_string(schedule.convention())), {}});
    }
    for (const auto &[key, spec] : setting_table()) {
        double a = 0;
        double b = 0;
        bool present = true;
        if (spec.direct) {
            a = dev.*spec.direct;
            b = base.*spec.direct;
        } else if (spec.jba) {
            a = dev.jba.*spec.jba;
            b = base.jba.*spec.jba;
        } else {
            present = (dev.*spec.optional).has_value();
            if ((dev.*spec.optional) == (base.*spec.optional)) {
                continue;
            }
            a = present ? *(dev.*spec.optional) : 0;
        }
        if (a == b || !present) {
            continue;
        }
        Quantity q = spec.field == Field::Angular ? freq(a) : Quantity{a, field_dimension(spec.field)};
        doc.settings.push_back({key, q, {}});
    }

    double now = 0;
    for (const PulseEvent &e : schedule.events()) {
        Statement st;
        bool gap = e.start > now + 1e-18;
        switch (e.kind) {
            case EventKind::XRotation:
                st.kind = StmtKind::Pulse;
                st.angle = e.angle;
                if (gap) {
                    st.at = e.start;
                    gap = false;
                }
                break;
            case EventKind::Wait:
                st.kind = StmtKind::Wait;
                st.duration = e.duration;
                st.selective = e.selective;
                break;
            case EventKind::ReadoutOn:
                st.kind = StmtKind::ReadoutOn;
                break;
            case EventKind::ReadoutOff:
                st.kind = StmtKind::ReadoutOff;
                break;
            case EventKind::Measure:
                st.kind = StmtKind::Measure;
                break;
        }
        if (gap) {
            Statement idle;
            idle.kind = StmtKind::Wait;
            idle.duration = e.start - now;
            doc.statements.push_back(idle);
        }
        doc.statements.push_back(st);
        now = std::max(now, e.end());
    }
    return doc;
}

Quantity parse_quantity(std::string_view text, Dimension bare_unit) {
    std::vector<Token> toks = tokenize(text);
    if (toks.empty() || toks[0].kind != TokenKind::Number) {
        throw ParseError({1, 1}, "expected a number in '" + std::string(text) + "'", {TokenKind::Number});
    }
    double v = 0;
    const std::string &lex = toks[0].lexeme;
    auto [ptr, ec] = std::from_chars(lex.data() + (lex[0] == '+' ? 1 : 0), lex.data() + lex.size(), v);
    if (ec != std::errc() || ptr != lex.data() + lex.size() || !std::isfinite(v)) {
        throw ParseError(toks[0].position, "malformed number '" + lex + "'");
    }
    if (toks.size() == 1) {
        return {v, bare_unit};
    }
    if (toks.size() > 2 || toks[1].kind != TokenKind::Unit) {
        throw ParseError(toks[1].position, "unexpected '" + toks[1].lexeme + "'", {TokenKind::Unit});
    }
    const UnitInfo *u = find_unit(toks[1].lexeme);
    if (bare_unit != Dimension::None && u->dimension != bare_unit) {
        throw ParseError(toks[1].position, std::string("expected a ") + dimension_name(bare_unit) + " unit");
    }
    double scaled = u->dimension == Dimension::Angle && u->scale != 1.0 ? deg_to_rad(v) : v * u->scale;
    return {scaled, u->dimension};
}

}  // namespace qfb::seq
