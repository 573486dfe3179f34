#pragma once

// CSV output. Numbers are printed with a fixed format so that files from
// equal seeds are byte-identical.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnd/harness.hpp"

namespace pnd {

inline std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline constexpr const char* kSweepHeader =
    "scenario,channel,oscillators,M,N,model_family,model_param,rho_db,trials,errors,ser,stderr,mean_terms,max_terms,flags";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        const auto& e = r.estimate;
        out << r.scenario << ',' << to_string(r.channel) << ',' << to_string(r.oscillators) << ',' << r.antennas << ','
            << r.constellation_size << ',' << r.model_family << ',' << format_number(r.model_param) << ',' << format_number(r.rho_db)
            << ',' << e.trials << ',' << e.errors << ',' << format_number(e.ser) << ',' << format_number(e.std_error) << ','
            << format_number(e.mean_terms) << ',' << e.max_terms << ',' << e.flags << '\n';
    }
}

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

inline std::string cells(const std::optional<SerEstimate>& e) {
    return e ? format_number(e->ser) + "," + format_number(e->std_error) : ",";
}

}  // namespace detail

inline void write_floor_bound_csv(std::ostream& out, const std::vector<FloorBoundRow>& rows) {
    out << "model_family,model_param,N,M,rho_db,floor,floor_quadrature,floor_terms,"
           "cc_s_ser,cc_s_stderr,fc_s_ser,fc_s_stderr,bernstein_union,high_snr_ns_ser,high_snr_ns_stderr,"
           "chebyshev_union,min_distance_fc_ns_ser,min_distance_fc_ns_stderr,trials\n";
    for (const auto& r : rows) {
        std::uint64_t trials = 0;
        for (const auto* e : {&r.cc_s, &r.fc_s, &r.high_snr_ns, &r.min_distance_fc_ns}) {
            if (*e) trials = std::max(trials, (*e)->trials);
        }
        out << r.model_family << ',' << format_number(r.model_param) << ',' << r.psk_order << ',' << r.antennas << ','
            << format_number(r.rho_db) << ',';
        if (r.floor) {
            out << format_number(r.floor->floor) << ',' << format_number(r.floor->quadrature) << ',' << r.floor->terms_used;
        } else {
            out << ",,";
        }
        out << ',' << detail::cells(r.cc_s) << ',' << detail::cells(r.fc_s) << ',' << detail::cell(r.bernstein_union) << ','
            << detail::cells(r.high_snr_ns) << ',' << detail::cell(r.chebyshev_union) << ',' << detail::cells(r.min_distance_fc_ns)
            << ',' << trials << '\n';
    }
}

/// Gnuplot script drawing SER against rho_db, one curve per
/// (scenario, M, N, model) group of the CSV.
inline std::string sweep_plot_script(const std::string& csv_path, const std::vector<SweepRow>& rows) {
    std::map<std::string, std::string> curves;  // title -> filter, ordered for stable output
    for (const auto& r : rows) {
        const std::string title = r.scenario + " M=" + std::to_string(r.antennas) + " N=" + std::to_string(r.constellation_size) + " " +
                                  r.model_family + "(" + format_number(r.model_param) + ")";
        const std::string filter = "strcol(1) eq '" + r.scenario + "' && $4 == " + std::to_string(r.antennas) +
                                   " && $5 == " + std::to_string(r.constellation_size) + " && strcol(6) eq '" + r.model_family +
                                   "' && abs($7 - " + format_number(r.model_param) + ") < 1e-9";
        curves.emplace(title, filter);
    }
    std::string gp;
    gp += "set datafile separator ','\n";
    gp += "set logscale y\n";
    gp += "set xlabel 'rho [dB]'\n";
    gp += "set ylabel 'SER'\n";
    gp += "set grid\n";
    gp += "plot \\\n";
    std::size_t k = 0;
    for (const auto& [title, filter] : curves) {
        gp += "  '" + csv_path + "' every ::1 using 8:((" + filter + ") ? ($11 > 0 ? $11 : 1/0) : 1/0) with linespoints title \"" +
              title + "\"";
        gp += ++k < curves.size() ? ", \\\n" : "\n";
    }
    return gp;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

}  // namespace pnd
