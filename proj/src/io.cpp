#include "tvrise/io.hpp"

#include "tvrise/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace tvrise {

namespace {

void append_indexed(std::vector<std::string>& out, const std::string& stem, int count) {
    for (int i = 1; i <= count; ++i) {
        out.push_back(stem + std::to_string(i));
    }
}

std::string number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void append_vec(std::string& line, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        line += ',';
        line += number(v(i));
    }
}

/// Infinite or NaN values become null so the documents stay valid JSON.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

} // namespace

std::vector<std::string> csv_header(int n, int m) {
    const int p = n + m;
    std::vector<std::string> h{"t"};
    append_indexed(h, "x", n);
    append_indexed(h, "e", n);
    append_indexed(h, "r", n);
    append_indexed(h, "u", n);
    append_indexed(h, "theta", p);
    append_indexed(h, "theta_hat", p);
    append_indexed(h, "theta_tilde", p);
    for (const char* c : {"P", "V_L", "branch", "switching"}) {
        h.emplace_back(c);
    }
    return h;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(std::ostream& out, const TrajectoryRecord& record) {
    const std::vector<std::string> header = csv_header(record.n, record.m);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i == 0 ? "" : ",") << csv_field(header[i]);
    }
    out << "\r\n";
    std::string line;
    for (const Sample& s : record.samples) {
        line = number(s.t);
        append_vec(line, s.x);
        append_vec(line, s.e);
        append_vec(line, s.r);
        append_vec(line, s.u);
        append_vec(line, s.theta);
        append_vec(line, s.theta_hat);
        append_vec(line, s.theta_tilde);
        line += ',' + number(s.P) + ',' + number(s.V_L) + ',' + csv_field(to_string(s.branch)) + ',' +
                (s.switching ? "1" : "0");
        out << line << "\r\n";
    }
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool after_quote = false;
    bool row_has_content = false;
    std::size_t line = 1;

    const auto end_row = [&]() {
        row.push_back(field);
        field.clear();
        if (table.header.empty()) {
            table.header = row;
        } else if (row.size() != table.header.size()) {
            throw InputError("CSV line " + std::to_string(line) + ": expected " +
                             std::to_string(table.header.size()) + " fields, got " + std::to_string(row.size()));
        } else {
            table.rows.push_back(row);
        }
        row.clear();
        row_has_content = false;
        after_quote = false;
    };

    char c = 0;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                    after_quote = true;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == ',') {
            row.push_back(field);
            field.clear();
            after_quote = false;
            row_has_content = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && in.peek() == '\n') {
                in.get(c);
            }
            if (row_has_content || !field.empty() || after_quote) {
                end_row();
            }
            ++line;
        } else if (c == '"') {
            if (!field.empty() || after_quote) {
                throw InputError("CSV line " + std::to_string(line) + ": quote inside an unquoted field");
            }
            in_quotes = true;
            row_has_content = true;
        } else {
            if (after_quote) {
                throw InputError("CSV line " + std::to_string(line) + ": characters after a closing quote");
            }
            field += c;
            row_has_content = true;
        }
    }
    if (in_quotes) {
        throw InputError("CSV: unterminated quoted field");
    }
    if (row_has_content || !field.empty() || after_quote) {
        end_row();
    }
    if (table.header.empty()) {
        throw InputError("CSV: empty input");
    }
    return table;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw InputError("CSV: missing column '" + name + "'");
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
    const std::size_t col = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::string& f = rows[k][col];
        double v = 0.0;
        const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
            throw InputError("CSV row " + std::to_string(k + 1) + ", column '" + name + "': not a number: '" + f +
                             "'");
        }
        out.push_back(v);
    }
    return out;
}

ordered_json metrics_json(const RunMetrics& m) {
    return ordered_json{{"final_error_norm", num(m.final_error_norm)},
                        {"final_window_rms", num(m.final_window_rms)},
                        {"final_window_max", num(m.final_window_max)},
                        {"sup_x", num(m.sup_x)},
                        {"sup_u", num(m.sup_u)},
                        {"sup_theta_hat", num(m.sup_theta_hat)},
                        {"sup_mu", num(m.sup_mu)},
                        {"sup_r", num(m.sup_r)},
                        {"sup_P", num(m.sup_P)},
                        {"min_P", num(m.min_P)},
                        {"projection_switches", m.switches},
                        {"sign_crossings", m.crossings}};
}

ordered_json bounds_json(const BoundReport& b, const GainCheck& gain) {
    return ordered_json{{"gamma1", num(b.gamma1)},
                        {"gamma2", num(b.gamma2)},
                        {"gamma3", num(b.gamma3)},
                        {"Yd_bar", num(b.Yd_bar)},
                        {"inverse_norm_bound", num(b.inverse_norm_bound)},
                        {"beta_required", num(b.beta_required)},
                        {"beta_minimal", num(b.beta_minimal)},
                        {"gain_condition_met", gain.met},
                        {"margin", num(gain.margin)}};
}

ordered_json verification_json(const VerificationReport& v) {
    ordered_json checks = ordered_json::array();
    for (const CheckOutcome& c : v.checks) {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    const LyapunovReport& l = v.lyapunov;
    return ordered_json{
        {"certified", v.certified()},
        {"all_pass", v.all_pass()},
        {"checks", checks},
        {"lyapunov",
         {{"min_P", num(l.min_P)},
          {"max_VL_increase", num(l.max_VL_increase)},
          {"worst_step", l.worst_step},
          {"monotone", l.monotone},
          {"c_fit", num(l.c_fit)},
          {"c_certified", num(l.c_certified)},
          {"z_decay_rate", num(l.z_decay_rate)},
          {"lambda3", num(l.lambda3)},
          {"lambda3_positive", l.lambda3_positive},
          {"P_nonnegative", l.P_nonnegative}}},
        {"projection",
         {{"max_norm", num(v.projection.max_norm)},
          {"max_tangency", num(v.projection.max_tangency)},
          {"boundary_samples", v.projection.boundary_samples},
          {"ball_ok", v.projection.ball_ok},
          {"tangency_ok", v.projection.tangency_ok}}},
        {"update_rate",
         {{"sup_rate", num(v.update_rate.sup_rate)},
          {"gamma3", num(v.update_rate.gamma3)},
          {"pass", v.update_rate.pass}}},
        {"region_of_attraction",
         {{"rho_hat", num(v.ntilde.rho_hat)},
          {"max_Ntilde_at_small_z", num(v.ntilde.max_at_small_z)},
          {"z_floor", num(v.ntilde.z_floor)},
          {"certificate", v.ntilde.region_certificate}}},
        {"identity_residual", num(v.identity_residual)}};
}

ordered_json run_summary(const TrajectoryRecord& record, const Scenario& scenario, const VerificationReport* report) {
    ordered_json out;
    out["scenario"] = scenario.name;
    out["controller"] = to_string(record.controller);
    out["n"] = record.n;
    out["m"] = record.m;
    out["dt"] = record.dt;
    out["t_end"] = scenario.horizon.t_end;
    out["samples"] = record.samples.size();
    out["gains"] = {{"alpha", scenario.gains.alpha},
                    {"K", scenario.gains.K},
                    {"beta", scenario.gains.beta},
                    {"theta_bar", scenario.gains.theta_bar}};
    out["metrics"] = metrics_json(run_metrics(record));
    if (report != nullptr) {
        out["bounds"] = bounds_json(report->bounds, report->gain);
        out["verification"] = verification_json(*report);
    } else {
        out["verification"] = nullptr;
    }
    return out;
}

void write_json_file(const std::string& path, const ordered_json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out << doc.dump(2) << '\n';
}

} // namespace tvrise
