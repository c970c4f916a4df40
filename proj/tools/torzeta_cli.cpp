// torzeta command line driver: verification suites, Fried zeta evaluation on
// a sigma grid, and cutoff-independence experiments for the glued section.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 usage or contract error.

#include <torzeta/report.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace torzeta;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int cmd_verify(const std::string& suite, uint64_t seed, int trials,
               const std::vector<std::string>& tol_overrides, const std::string& out,
               bool timings) {
    std::map<std::string, double> tol;
    for (const auto& s : tol_overrides) {
        auto eq = s.find('=');
        if (eq == std::string::npos) {
            std::cerr << "bad --tolerance entry (want name=value): " << s << "\n";
            return 2;
        }
        tol[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    }
    std::vector<SuiteReport> reports;
    try {
        reports = run_suites(suite, seed, trials, tol.empty() ? nullptr : &tol);
    } catch (const StructuralError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    Json doc = reports_to_json(reports, seed, timings);
    std::string text = doc.dump(2) + "\n";
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        f << text;
    } else {
        std::cout << text;
    }
    return doc.at("all_pass").get<bool>() ? 0 : 1;
}

int cmd_zeta(const std::vector<long long>& matrix, double theta, const std::string& sigma_spec,
             int K, const std::string& out) {
    SuspensionModel model{matrix[0], matrix[1], matrix[2], matrix[3], theta};
    try {
        model.validate();
    } catch (const ModelError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    // sigma grid: "start:stop:step" on the real axis, or a comma list of
    // re[+imi] values.
    std::vector<Cplx> sigmas;
    auto parse_complex = [](const std::string& s) {
        // forms: "a", "a+bi", "a-bi"
        size_t pos = s.find_first_of("+-", 1);
        while (pos != std::string::npos && (s[pos - 1] == 'e' || s[pos - 1] == 'E'))
            pos = s.find_first_of("+-", pos + 1);
        if (pos == std::string::npos || s.back() != 'i') return Cplx(std::stod(s), 0.0);
        double re = std::stod(s.substr(0, pos));
        double im = std::stod(s.substr(pos, s.size() - pos - 1));
        return Cplx(re, im);
    };
    try {
        if (sigma_spec.find(':') != std::string::npos) {
            double start = 0, stop = 0, step = 0;
            if (std::sscanf(sigma_spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
                step <= 0) {
                std::cerr << "bad --sigma grid (want start:stop:step)\n";
                return 2;
            }
            for (double s = start; s <= stop + 1e-12; s += step) sigmas.emplace_back(s, 0.0);
        } else {
            std::stringstream ss(sigma_spec);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) sigmas.push_back(parse_complex(item));
        }
    } catch (const std::exception&) {
        std::cerr << "bad --sigma value\n";
        return 2;
    }
    if (sigmas.empty()) {
        std::cerr << "empty --sigma grid\n";
        return 2;
    }

    std::ostringstream csv;
    csv << "sigma_re,sigma_im,K,value_re,value_im,tail_bound,closed_re,closed_im,abs_diff\n";
    for (Cplx s : sigmas) {
        ZetaEvaluation ev = fried_zeta_with_oracle(model, s, K);
        double diff = ev.has_closed_form ? std::abs(ev.value - ev.closed_form)
                                         : std::numeric_limits<double>::quiet_NaN();
        csv << format_double(s.real()) << ',' << format_double(s.imag()) << ',' << K << ','
            << format_double(ev.value.real()) << ',' << format_double(ev.value.imag()) << ','
            << format_double(ev.tail_bounded ? ev.tail_bound
                                             : std::numeric_limits<double>::infinity())
            << ',' << format_double(ev.has_closed_form ? ev.closed_form.real() : 0.0) << ','
            << format_double(ev.has_closed_form ? ev.closed_form.imag() : 0.0) << ','
            << format_double(diff) << "\n";
    }
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        f << csv.str();
    } else {
        std::cout << csv.str();
    }
    return 0;
}

int cmd_glue(const std::vector<int>& dims, const std::string& input, uint64_t seed,
             std::vector<double> cutoffs, const std::string& out) {
    Complex c;
    try {
        if (!input.empty()) {
            std::ifstream f(input);
            if (!f) {
                std::cerr << "cannot open " << input << "\n";
                return 2;
            }
            Json doc = Json::parse(f);
            c = complex_from_document(doc);
            if (!c.d || !c.delta) {
                std::cerr << "input document needs both d and delta\n";
                return 2;
            }
        } else {
            if (dims.empty()) {
                std::cerr << "need --dims or --in\n";
                return 2;
            }
            GradedSpace E(0, dims);
            auto ranks = detail::exact_ranks(E);  // throws if infeasible
            c = random_invertible_pair(seed, E);
            (void)ranks;
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (cutoffs.size() < 2) {
        std::cerr << "need at least 2 cutoffs\n";
        return 2;
    }
    std::map<int, Mat> h;
    CohomologyData H = cohomology(c);
    for (int i = c.space.p; i <= c.space.q; ++i)
        if (H.betti(i) > 0) h[i] = H.reps.at(i);

    Json entries = Json::array();
    std::vector<Cplx> values;
    bool had_error = false;
    for (double a : cutoffs) {
        Json e{{"cutoff", a}};
        try {
            Cplx v = glued_section(c, a, h);
            e["value_re"] = v.real();
            e["value_im"] = v.imag();
            values.push_back(v);
        } catch (const std::exception& ex) {
            e["error"] = ex.what();
            had_error = true;
        }
        entries.push_back(std::move(e));
    }
    double spread = 0;
    for (size_t k = 1; k < values.size(); ++k)
        spread = std::max(spread, std::abs(values[k] - values[0]) /
                                      std::max(1e-300, std::abs(values[0])));
    Json doc{{"seed", seed},
             {"dims", c.space.dims},
             {"p", c.space.p},
             {"cutoffs", std::move(entries)},
             {"max_relative_spread", spread},
             {"pass", !had_error && spread <= 1e-8}};
    std::string text = doc.dump(2) + "\n";
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        f << text;
    } else {
        std::cout << text;
    }
    if (had_error) return 2;
    return (spread <= 1e-8) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"determinant-line torsion and Fried zeta verification"};
    app.require_subcommand(1);

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite = "all";
    uint64_t seed = 1;
    int trials = 200;
    std::vector<std::string> tols;
    std::string out;
    bool timings = false;
    verify->add_option("--suite", suite, "detline|variation|spectral|fried|all");
    verify->add_option("--seed", seed, "master seed");
    verify->add_option("--trials", trials, "trial count for randomized checks");
    verify->add_option("--tolerance", tols, "override: check_name=value")->take_all();
    verify->add_option("--out", out, "write JSON report to file");
    verify->add_flag("--timings", timings, "include wall times in the report");

    auto* zeta = app.add_subcommand("zeta", "evaluate the Fried zeta function");
    std::vector<long long> matrix{2, 1, 1, 1};
    double theta = 0.0;
    std::string sigma = "1.5:3.0:0.1";
    int K = 60;
    std::string zout;
    zeta->add_option("--matrix", matrix, "a,b,c,d of an SL(2,Z) matrix")
        ->delimiter(',')
        ->expected(4);
    zeta->add_option("--theta", theta, "twist angle per unit time");
    zeta->add_option("--sigma", sigma, "grid start:stop:step or list re+imi,...");
    zeta->add_option("--K", K, "truncation period");
    zeta->add_option("--out", zout, "write CSV to file");

    auto* glue = app.add_subcommand("glue", "glued-section cutoff independence");
    std::vector<int> dims;
    std::string gin, gout;
    uint64_t gseed = 1;
    std::vector<double> cutoffs;
    glue->add_option("--dims", dims, "dims of a random instance (degrees from 0)")
        ->delimiter(',');
    glue->add_option("--in", gin, "ComplexDocument JSON input");
    glue->add_option("--seed", gseed, "seed for the random instance");
    glue->add_option("--cutoffs", cutoffs, "cutoff radii")->delimiter(',');
    glue->add_option("--out", gout, "write JSON to file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(suite, seed, trials, tols, out, timings);
        if (zeta->parsed()) return cmd_zeta(matrix, theta, sigma, K, zout);
        if (glue->parsed()) return cmd_glue(dims, gin, gseed, cutoffs, gout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
