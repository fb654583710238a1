#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "failbench/errors.hpp"
#include "failbench/io.hpp"

namespace failbench {

namespace {

// Civil-date conversion (Howard Hinnant's algorithms); avoids timezone state.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

int parse_int_field(const std::string& s, std::size_t pos, std::size_t len) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
    if (ec != std::errc() || ptr != s.data() + pos + len) {
        throw InvalidConfig("bad timestamp field in '" + s + "'");
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// RFC 4180 split of one record (no embedded newlines in our formats).
std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            if (!cur.empty()) throw SchemaError(line_no, "stray quote inside unquoted field");
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw SchemaError(line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

Timestamp parse_iso8601(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS[.fff]Z
    if (text.size() < 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':' || text.back() != 'Z') {
        throw InvalidConfig("bad ISO-8601 timestamp '" + text + "'");
    }
    const int year = parse_int_field(text, 0, 4);
    const int month = parse_int_field(text, 5, 2);
    const int day = parse_int_field(text, 8, 2);
    const int hour = parse_int_field(text, 11, 2);
    const int minute = parse_int_field(text, 14, 2);
    const int second = parse_int_field(text, 17, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        throw InvalidConfig("out-of-range ISO-8601 timestamp '" + text + "'");
    }
    if (text.size() > 20) {  // fractional part, floored away
        if (text[19] != '.') throw InvalidConfig("bad ISO-8601 timestamp '" + text + "'");
        for (std::size_t i = 20; i + 1 < text.size(); ++i) {
            if (text[i] < '0' || text[i] > '9') {
                throw InvalidConfig("bad ISO-8601 timestamp '" + text + "'");
            }
        }
    }
    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                              static_cast<unsigned>(day));
    return {days * 86400 + hour * 3600 + minute * 60 + second};
}

std::string format_iso8601(Timestamp t) {
    std::int64_t days = t.seconds_utc / 86400;
    std::int64_t sod = t.seconds_utc % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(sod / 3600), static_cast<long long>(sod % 3600 / 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

Seconds parse_duration(const std::string& text) {
    if (text.size() < 2) throw InvalidConfig("bad duration '" + text + "'");
    const char unit = text.back();
    Seconds scale = 0;
    if (unit == 's') scale = 1;
    else if (unit == 'm') scale = 60;
    else if (unit == 'h') scale = 3600;
    else throw InvalidConfig("duration '" + text + "' needs an s/m/h suffix");

    const std::string num = text.substr(0, text.size() - 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size() || value <= 0.0) {
        throw InvalidConfig("bad duration '" + text + "'");
    }
    const double seconds = value * static_cast<double>(scale);
    const double rounded = std::round(seconds);
    if (std::abs(seconds - rounded) > 1e-9 || rounded < 1.0) {
        throw InvalidConfig("duration '" + text + "' is not a whole number of seconds");
    }
    return static_cast<Seconds>(rounded);
}

std::string format_duration(Seconds s) {
    if (s % 3600 == 0) return std::to_string(s / 3600) + "h";
    if (s % 60 == 0) return std::to_string(s / 60) + "m";
    return std::to_string(s) + "s";
}

std::tuple<RawSeries, AlertLog, IngestReport> ingest(
    const std::filesystem::path& telemetry_csv, const std::filesystem::path& alerts_csv,
    const std::vector<std::string>* expected_variables) {
    IngestReport rep;
    RawSeries raw;

    std::ifstream tf(telemetry_csv);
    if (!tf) throw InvalidConfig("cannot open telemetry file " + telemetry_csv.string());

    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(tf, line)) throw SchemaError(1, "telemetry file is empty");
    {
        const auto header = split_csv(strip_cr(line), line_no);
        if (header.empty() || header.front() != "timestamp") {
            throw SchemaError(1, "first telemetry column must be 'timestamp'");
        }
        raw.variables.assign(header.begin() + 1, header.end());
        if (raw.variables.empty()) throw SchemaError(1, "telemetry has no variable columns");
        for (std::size_t i = 0; i < raw.variables.size(); ++i) {
            if (raw.variables[i].empty()) throw SchemaError(1, "empty variable column name");
            for (std::size_t j = i + 1; j < raw.variables.size(); ++j) {
                if (raw.variables[i] == raw.variables[j]) {
                    throw UnknownVariableColumn("duplicate telemetry column '" + raw.variables[i] + "'");
                }
            }
        }
        if (expected_variables && *expected_variables != raw.variables) {
            for (const auto& v : raw.variables) {
                if (std::find(expected_variables->begin(), expected_variables->end(), v) ==
                    expected_variables->end()) {
                    throw UnknownVariableColumn("unexpected telemetry column '" + v + "'");
                }
            }
            throw UnknownVariableColumn("telemetry columns do not match the configured variables");
        }
    }
    raw.samples.resize(raw.variables.size());

    Timestamp prev{std::numeric_limits<std::int64_t>::min()};
    while (std::getline(tf, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line, line_no);
        if (fields.size() != raw.variables.size() + 1) {
            throw SchemaError(line_no, "expected " + std::to_string(raw.variables.size() + 1) +
                                           " fields, got " + std::to_string(fields.size()));
        }
        Timestamp t;
        try {
            t = parse_iso8601(fields[0]);
        } catch (const ValidationError& e) {
            throw SchemaError(line_no, e.what());
        }
        if (t < prev) throw NonMonotonicTimestamps("telemetry timestamps decrease at line " +
                                                   std::to_string(line_no));
        prev = t;
        ++rep.telemetry_rows;
        for (std::size_t v = 0; v < raw.variables.size(); ++v) {
            const std::string& cell = fields[v + 1];
            if (cell.empty()) continue;
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw SchemaError(line_no, "bad number '" + cell + "' in column " +
                                               raw.variables[v]);
            }
            auto& samples = raw.samples[v];
            if (!samples.empty() && samples.back().time == t) {
                samples.back().value = value;  // last observation wins
                ++rep.duplicate_cells;
            } else {
                samples.push_back({t, value});
            }
        }
    }
    for (std::size_t v = 0; v < raw.variables.size(); ++v) {
        if (raw.samples[v].empty()) {
            throw SchemaError(line_no, "variable '" + raw.variables[v] + "' has no observations");
        }
    }

    AlertLog alerts;
    std::ifstream af(alerts_csv);
    if (!af) throw InvalidConfig("cannot open alerts file " + alerts_csv.string());
    line_no = 1;
    if (!std::getline(af, line)) throw SchemaError(1, "alerts file is empty");
    if (strip_cr(line) != "timestamp,code") {
        throw SchemaError(1, "alerts header must be 'timestamp,code'");
    }
    Timestamp prev_alert{std::numeric_limits<std::int64_t>::min()};
    while (std::getline(af, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line, line_no);
        if (fields.size() != 2) throw SchemaError(line_no, "expected 2 fields");
        Timestamp t;
        try {
            t = parse_iso8601(fields[0]);
        } catch (const ValidationError& e) {
            throw SchemaError(line_no, e.what());
        }
        if (t < prev_alert) {
            throw NonMonotonicTimestamps("alert timestamps decrease at line " +
                                         std::to_string(line_no));
        }
        prev_alert = t;
        int code = 0;
        const auto [ptr, ec] = std::from_chars(fields[1].data(),
                                               fields[1].data() + fields[1].size(), code);
        if (ec != std::errc() || ptr != fields[1].data() + fields[1].size() || code < 0) {
            throw SchemaError(line_no, "bad alert code '" + fields[1] + "'");
        }
        alerts.events.push_back({t, code});
        ++rep.alert_rows;
    }

    return {std::move(raw), std::move(alerts), rep};
}

void write_telemetry_csv(const std::filesystem::path& path, const RawSeries& raw) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputUnwritable(path.string());
    out << "timestamp";
    for (const auto& v : raw.variables) out << ',' << csv_quote(v);
    out << '\n';

    // Merge per-variable streams into wide rows keyed by timestamp.
    std::map<Timestamp, std::vector<std::pair<std::size_t, double>>> rows;
    for (std::size_t v = 0; v < raw.variables.size(); ++v) {
        for (const auto& s : raw.samples[v]) rows[s.time].emplace_back(v, s.value);
    }
    for (const auto& [t, cells] : rows) {
        std::vector<std::string> fields(raw.variables.size());
        for (const auto& [v, value] : cells) fields[v] = format_double(value);
        out << format_iso8601(t);
        for (const auto& f : fields) out << ',' << f;
        out << '\n';
    }
    if (!out.flush()) throw OutputUnwritable(path.string());
}

void write_alerts_csv(const std::filesystem::path& path, const AlertLog& alerts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputUnwritable(path.string());
    out << "timestamp,code\n";
    for (const auto& e : alerts.events) {
        out << format_iso8601(e.time) << ',' << e.code << '\n';
    }
    if (!out.flush()) throw OutputUnwritable(path.string());
}

void write_sessions_csv(const std::filesystem::path& path, const RegularSeries& series,
                        const SessionMap& sessions) {
    if (sessions.size() != series.rows) throw LengthMismatch("session map does not match the series");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputUnwritable(path.string());
    out << "timestamp,session_id\n";
    for (std::size_t k = 0; k < series.rows; ++k) {
        out << format_iso8601(series.row_time(k)) << ',' << sessions.ids[k] << '\n';
    }
    if (!out.flush()) throw OutputUnwritable(path.string());
}

void write_ground_truth_json(const std::filesystem::path& path, const GroundTruth& truth,
                             const SynthConfig& config) {
    nlohmann::ordered_json j;
    j["format"] = "failbench-ground-truth";
    j["seed"] = config.seed;
    j["period_s"] = config.period_s;
    j["start"] = format_iso8601(truth.start);
    j["n_rows"] = truth.n_rows;
    auto& sessions = j["sessions"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : truth.session_rows) {
        sessions.push_back({{"first_row", a}, {"last_row", b}});
    }
    auto& alerts = j["alerts"] = nlohmann::ordered_json::array();
    for (const auto& a : truth.alerts) {
        alerts.push_back({{"time", format_iso8601(a.time)},
                          {"motif_id", a.motif_id},
                          {"session_index", a.session_index}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputUnwritable(path.string());
    out << j.dump(2) << '\n';
    if (!out.flush()) throw OutputUnwritable(path.string());
}

}  // namespace failbench
