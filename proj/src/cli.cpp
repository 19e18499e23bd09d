#include "blocksplit/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "CLI11.hpp"
#include "blocksplit/analysis.hpp"
#include "blocksplit/block_system.hpp"
#include "blocksplit/kernels.hpp"
#include "blocksplit/mms.hpp"
#include "blocksplit/schemes.hpp"

namespace blocksplit {

namespace {

const double pi = std::acos(-1.0);

constexpr const char* kRecordHeader =
    "scheme,beta,n_cells,iterations,status,final_res_u,final_res_v,final_err_u,final_err_v";

/// Full-precision decimal form; round-trips doubles exactly.
std::string format_full(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

std::string json_number(double x) {
    if (!std::isfinite(x)) return "null";
    return format_full(x);
}

std::string json_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// One scheme request: the canonical name used in output rows plus the
/// fully resolved spec.
struct SchemeChoice {
    std::string name;
    SchemeSpec spec;
};

SchemeChoice parse_scheme(const std::string& raw, double omega, double ell,
                          const std::optional<Ordering>& ordering) {
    const std::string name = lowercase(raw);
    SchemeSpec spec;
    if (name == "bj") {
        spec.kind = SchemeKind::BJ;
    } else if (name == "bgs") {
        spec.kind = SchemeKind::BGS;
    } else if (name == "bsor") {
        spec.kind = SchemeKind::BSOR;
        spec.omega = omega;
    } else if (name == "lscheme") {
        spec.kind = SchemeKind::LSCHEME;
        spec.ell = ell;
    } else if (name == "spj_u" || name == "spj_v" || name == "spj_a" || name == "s2pj_u" ||
               name == "s2pj_v" || name == "s2pj_a") {
        spec.kind = name[0] == 's' && name[1] == '2' ? SchemeKind::S2PJ : SchemeKind::SPJ;
        const char side = name.back();
        spec.side = side == 'u'   ? SchemeSide::U
                    : side == 'v' ? SchemeSide::V
                                  : SchemeSide::ALTERNATE;
    } else {
        throw std::invalid_argument("unknown scheme '" + raw +
                                    "' (expected bj, bgs, bsor, lscheme, spj_u, spj_v, spj_a, "
                                    "s2pj_u, s2pj_v, s2pj_a)");
    }
    spec.ordering = ordering;
    validate_spec(spec);
    return {name, spec};
}

std::vector<SchemeChoice> parse_schemes(const std::vector<std::string>& names, double omega,
                                        double ell, const std::optional<Ordering>& ordering) {
    if (names.empty()) throw std::invalid_argument("scheme list must not be empty");
    std::vector<SchemeChoice> out;
    for (const std::string& raw : names) {
        SchemeChoice choice = parse_scheme(raw, omega, ell, ordering);
        for (const SchemeChoice& seen : out) {
            if (seen.name == choice.name) {
                throw std::invalid_argument("duplicate scheme '" + choice.name + "' in --schemes");
            }
        }
        out.push_back(std::move(choice));
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    const double e_lo = std::log10(lo), e_hi = std::log10(hi);
    for (int i = 0; i < count; ++i) {
        out.push_back(std::pow(10.0, e_lo + (e_hi - e_lo) * i / (count - 1)));
    }
    return out;
}

std::vector<double> parse_beta_range(const std::string& text) {
    double lo = 0.0, hi = 0.0;
    int count = 0, consumed = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d%n", &lo, &hi, &count, &consumed) != 3 ||
        consumed != static_cast<int>(text.size())) {
        throw std::invalid_argument("--beta-range expects lo:hi:count (got '" + text + "')");
    }
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
        throw std::invalid_argument("--beta-range needs 0 < lo <= hi and count >= 1 (got '" +
                                    text + "')");
    }
    return log_spaced(lo, hi, count);
}

ManufacturedProblem assemble_model(Model model, int dim, int cells, double beta,
                                   double contrast) {
    if (dim == 1) {
        if (model == Model::DUAL_POROSITY) {
            return assemble_dual_porosity_1d({0.0, pi, cells}, beta);
        }
        return assemble_quad_laplacian_1d({0.0, 2.0 * pi, cells}, beta);
    }
    if (model == Model::DUAL_POROSITY) {
        return assemble_dual_porosity_2d({cells, cells}, beta, contrast);
    }
    return assemble_quad_laplacian_2d({cells, cells}, beta);
}

void check_beta_pre(Model model, double beta) {
    if (model == Model::QUAD_LAPLACIAN && !(beta > 0.0)) {
        throw std::invalid_argument("quad-laplacian requires beta > 0 (got " + format_full(beta) +
                                    ")");
    }
    if (model == Model::DUAL_POROSITY && beta < 0.0) {
        throw std::invalid_argument("dual-porosity requires beta >= 0 (got " + format_full(beta) +
                                    ")");
    }
}

struct RunRecord {
    std::string scheme;
    double beta = 0.0;
    long n_cells = 0;
    int iterations = 0;
    RunStatus status = RunStatus::MAX_ITERS;
    double res_u = 0.0;
    double res_v = 0.0;
    double err_u = 0.0;
    double err_v = 0.0;
};

double norm_diff(const DenseVector& a, const DenseVector& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Runs one scheme on one system. Errors are measured against the discrete
/// solution of the monolithic system (solver error, not discretization
/// error); they are NaN when no reference is available. Failures inside the
/// run are recorded in the status, never thrown.
RunRecord execute(const BlockSystem& sys, const SchemeChoice& choice, double tol, int max_iters,
                  double beta, long n_cells, const BlockVector* reference) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    RunRecord rec;
    rec.scheme = choice.name;
    rec.beta = beta;
    rec.n_cells = n_cells;
    try {
        const IterationReport rep = run(sys, choice.spec, zero_like(sys), tol, max_iters);
        rec.iterations = rep.iterations;
        rec.status = rep.status;
        rec.res_u = rep.res_u_history.back();
        rec.res_v = rep.res_v_history.back();
        rec.err_u = reference ? norm_diff(rep.final_w.u, reference->u) : nan;
        rec.err_v = reference ? norm_diff(rep.final_w.v, reference->v) : nan;
    } catch (const std::exception&) {
        rec.status = RunStatus::INNER_FAILURE;
        rec.iterations = 0;
        rec.res_u = rec.res_v = rec.err_u = rec.err_v = nan;
    }
    return rec;
}

void sort_records(std::vector<RunRecord>& records) {
    std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        return a.beta < b.beta;
    });
}

bool any_failed(const std::vector<RunRecord>& records) {
    for (const RunRecord& rec : records) {
        if (rec.status == RunStatus::DIVERGED || rec.status == RunStatus::INNER_FAILURE) {
            return true;
        }
    }
    return false;
}

std::string records_csv(const std::vector<RunRecord>& records) {
    std::string out = std::string(kRecordHeader) + "\n";
    for (const RunRecord& rec : records) {
        out += rec.scheme + "," + format_full(rec.beta) + "," + std::to_string(rec.n_cells) +
               "," + std::to_string(rec.iterations) + "," + to_string(rec.status) + "," +
               format_full(rec.res_u) + "," + format_full(rec.res_v) + "," +
               format_full(rec.err_u) + "," + format_full(rec.err_v) + "\n";
    }
    return out;
}

std::string records_json(const std::vector<RunRecord>& records) {
    std::string out = "[\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RunRecord& rec = records[i];
        out += "  {\"scheme\": " + json_quote(rec.scheme) + ", \"beta\": " +
               json_number(rec.beta) + ", \"n_cells\": " + std::to_string(rec.n_cells) +
               ", \"iterations\": " + std::to_string(rec.iterations) + ", \"status\": " +
               json_quote(to_string(rec.status)) + ", \"final_res_u\": " + json_number(rec.res_u) +
               ", \"final_res_v\": " + json_number(rec.res_v) +
               ", \"final_err_u\": " + json_number(rec.err_u) +
               ", \"final_err_v\": " + json_number(rec.err_v) + "}";
        out += i + 1 < records.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
    file << content;
    if (!file.good()) throw std::runtime_error("failed writing output file '" + path + "'");
}

std::string sweep_gnuplot(const std::string& csv_path, const std::vector<SchemeChoice>& schemes) {
    std::string names;
    for (const SchemeChoice& choice : schemes) {
        if (!names.empty()) names += ' ';
        names += choice.name;
    }
    std::string s = "# Iterations per scheme against the coupling strength.\n";
    s += "set datafile separator \",\"\n";
    s += "set logscale x\n";
    s += "set xlabel \"beta\"\n";
    s += "set ylabel \"iterations\"\n";
    s += "set key outside\n";
    s += "plot for [s in \"" + names + "\"] \"" + csv_path +
         "\" every ::1 using (strcol(1) eq s ? column(2) : NaN):4 with linespoints title s\n";
    return s;
}

std::string converge_gnuplot(const std::string& csv_path) {
    std::string s = "# Discrete L2 error of both fields under grid refinement.\n";
    s += "set datafile separator \",\"\n";
    s += "set logscale xy\n";
    s += "set xlabel \"cells\"\n";
    s += "set ylabel \"discrete L2 error\"\n";
    s += "plot \"" + csv_path + "\" every ::1 using 1:2 with linespoints title \"u\", \"\" every "
         "::1 using 1:3 with linespoints title \"v\"\n";
    return s;
}

std::string analyses_json(const BlockSystem& sys, const std::vector<SchemeChoice>& schemes,
                          std::uint64_t seed) {
    std::string out = "[\n";
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        const AnalysisReport report = analyze(sys, schemes[i].spec, seed);
        std::string body = to_json(report);
        body.insert(2, "  \"scheme\": " + json_quote(schemes[i].name) + ",\n");
        if (!body.empty() && body.back() == '\n') body.pop_back();
        out += body;
        out += i + 1 < schemes.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Block-iterative splitting schemes for coupled two-field problems"};
    app.require_subcommand(1);

    std::string model_name = "dual-porosity";
    int dim = 1;
    int cells = 0;  // 0: pick the per-dimension default after parsing
    std::vector<int> levels;
    std::vector<std::string> scheme_names = {"bgs"};
    double tol = 0.0;  // 0: pick the per-dimension default after parsing
    int max_iters = 100;
    std::string ordering_name;
    std::string format = "csv";
    std::string out_path;
    bool strict = false;
    std::uint64_t seed = 20240801;
    double omega = 1.0;
    double ell = 0.0;
    double contrast = 3.0;
    double beta_single = 1.0;
    std::vector<double> beta_list;
    std::string beta_range;
    bool gnuplot = false;
    std::string mm_prefix;

    auto add_problem = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_name, "Test problem: dual-porosity or quad-laplacian")
            ->transform(
                CLI::IsMember({"dual-porosity", "quad-laplacian", "dp", "ql"}, CLI::ignore_case));
        cmd->add_option("--dim", dim, "Spatial dimension")->check(CLI::IsMember({1, 2}));
        cmd->add_option("--contrast", contrast,
                        "Permeability contrast of the 2D dual-porosity fields");
    };
    auto add_solver = [&](CLI::App* cmd) {
        cmd->add_option("--schemes", scheme_names,
                        "Schemes to run: bj, bgs, bsor, lscheme, spj_u, spj_v, spj_a, s2pj_u, "
                        "s2pj_v, s2pj_a")
            ->delimiter(',');
        cmd->add_option("--tol", tol,
                        "Relative residual tolerance (default 1e-6 in 1D, 1e-8 otherwise)");
        cmd->add_option("--max-iters", max_iters, "Outer iteration cap");
        cmd->add_option("--ordering", ordering_name, "Block update order: u-first or v-first")
            ->transform(CLI::IsMember({"u-first", "v-first"}, CLI::ignore_case));
        cmd->add_option("--omega", omega, "Relaxation factor for bsor");
        cmd->add_option("--ell", ell, "Relaxation constant for lscheme");
    };
    auto add_output = [&](CLI::App* cmd, bool with_format) {
        if (with_format) {
            cmd->add_option("--format", format, "Output format: csv or json")
                ->transform(CLI::IsMember({"csv", "json"}, CLI::ignore_case));
        }
        cmd->add_option("--out", out_path, "Output file (stdout when omitted)");
        cmd->add_flag("--strict", strict,
                      "Exit 2 when any run diverges or an inner solve fails");
        cmd->add_option("--seed", seed, "Seed for randomized eigenvalue estimator starts");
    };

    CLI::App* cmd_run =
        app.add_subcommand("run", "Run the requested schemes once; one record per scheme");
    add_problem(cmd_run);
    add_solver(cmd_run);
    add_output(cmd_run, true);
    cmd_run->add_option("--beta", beta_single, "Coupling strength");
    cmd_run->add_option("--cells", cells, "Cells per dimension (default 128 in 1D, 32 in 2D)");

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "Run the cross product of schemes and beta values");
    add_problem(cmd_sweep);
    add_solver(cmd_sweep);
    add_output(cmd_sweep, true);
    CLI::Option* sweep_beta =
        cmd_sweep->add_option("--beta", beta_list, "Explicit beta values")->delimiter(',');
    cmd_sweep
        ->add_option("--beta-range", beta_range,
                     "Log-spaced betas lo:hi:count (default 0.01:10000:25)")
        ->excludes(sweep_beta);
    cmd_sweep->add_option("--cells", cells, "Cells per dimension (default 128 in 1D, 32 in 2D)");
    cmd_sweep->add_flag("--gnuplot", gnuplot, "Also write a <out>.gp plotting script");

    CLI::App* cmd_analyze = app.add_subcommand(
        "analyze", "Check the convergence-theory conditions; JSON report per scheme");
    add_problem(cmd_analyze);
    add_solver(cmd_analyze);
    add_output(cmd_analyze, false);
    cmd_analyze->add_option("--beta", beta_single, "Coupling strength");
    cmd_analyze->add_option("--cells", cells,
                            "Cells per dimension (default 128 in 1D, 32 in 2D)");

    CLI::App* cmd_converge = app.add_subcommand(
        "converge", "Grid-refinement study against the manufactured solution (CSV)");
    add_problem(cmd_converge);
    add_output(cmd_converge, false);
    cmd_converge->add_option("--beta", beta_single, "Coupling strength");
    cmd_converge
        ->add_option("--cells", levels,
                     "Dyadic grid levels, at least three (default 64,128,256 in 1D and "
                     "16,32,64 in 2D)")
        ->delimiter(',');
    cmd_converge->add_flag("--gnuplot", gnuplot, "Also write a <out>.gp plotting script");

    CLI::App* cmd_mm = app.add_subcommand(
        "solve-mm", "Load <prefix>_{A,B,C,D}.mtx and <prefix>_{f1,f2}.vec, then run schemes");
    cmd_mm->add_option("prefix", mm_prefix, "Path prefix of the block system files")->required();
    add_solver(cmd_mm);
    add_output(cmd_mm, true);

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("blocksplit");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const Model model = (model_name == "quad-laplacian" || model_name == "ql")
                                ? Model::QUAD_LAPLACIAN
                                : Model::DUAL_POROSITY;
        std::optional<Ordering> ordering;
        if (ordering_name == "u-first") ordering = Ordering::U_FIRST;
        if (ordering_name == "v-first") ordering = Ordering::V_FIRST;
        if (max_iters < 1) {
            throw std::invalid_argument("max-iters must be at least 1 (got " +
                                        std::to_string(max_iters) + ")");
        }
        if (tol != 0.0 && !(tol > 0.0)) {
            throw std::invalid_argument("tol must be positive (got " + format_full(tol) + ")");
        }
        const double run_tol = tol != 0.0 ? tol : (dim == 1 ? 1e-6 : 1e-8);
        const int run_cells = cells != 0 ? cells : (dim == 1 ? 128 : 32);
        if (gnuplot && out_path.empty()) {
            throw std::invalid_argument("--gnuplot needs --out (the script references the CSV)");
        }

        if (app.got_subcommand(cmd_run)) {
            const std::vector<SchemeChoice> schemes =
                parse_schemes(scheme_names, omega, ell, ordering);
            check_beta_pre(model, beta_single);
            const ManufacturedProblem prob =
                assemble_model(model, dim, run_cells, beta_single, contrast);
            const BlockVector reference = monolithic_solve(prob.system);
            std::vector<RunRecord> records;
            records.reserve(schemes.size());
            for (const SchemeChoice& choice : schemes) {
                records.push_back(execute(prob.system, choice, run_tol, max_iters, beta_single,
                                          run_cells, &reference));
            }
            sort_records(records);
            write_output(out_path, format == "json" ? records_json(records)
                                                    : records_csv(records));
            return strict && any_failed(records) ? 2 : 0;
        }

        if (app.got_subcommand(cmd_sweep)) {
            const std::vector<SchemeChoice> schemes =
                parse_schemes(scheme_names, omega, ell, ordering);
            std::vector<double> betas;
            if (!beta_range.empty()) {
                betas = parse_beta_range(beta_range);
            } else if (!beta_list.empty()) {
                betas = beta_list;
            } else {
                betas = log_spaced(1e-2, 1e4, 25);
            }
            for (double beta : betas) check_beta_pre(model, beta);

            // Assemble every system and its reference solution up front so
            // the runs are fully independent.
            std::vector<ManufacturedProblem> problems;
            std::vector<std::optional<BlockVector>> references;
            problems.reserve(betas.size());
            references.reserve(betas.size());
            for (double beta : betas) {
                problems.push_back(assemble_model(model, dim, run_cells, beta, contrast));
                try {
                    references.push_back(monolithic_solve(problems.back().system));
                } catch (const std::exception&) {
                    references.push_back(std::nullopt);
                }
            }

            const int n_schemes = static_cast<int>(schemes.size());
            const int n_tasks = static_cast<int>(betas.size()) * n_schemes;
            std::vector<RunRecord> records(static_cast<std::size_t>(n_tasks));
#pragma omp parallel for schedule(dynamic)
            for (int t = 0; t < n_tasks; ++t) {
                const int b = t / n_schemes;
                const int s = t % n_schemes;
                const BlockVector* reference =
                    references[b] ? &*references[b] : nullptr;
                records[t] = execute(problems[b].system, schemes[s], run_tol, max_iters,
                                     betas[b], run_cells, reference);
            }
            sort_records(records);
            write_output(out_path, format == "json" ? records_json(records)
                                                    : records_csv(records));
            if (gnuplot) write_output(out_path + ".gp", sweep_gnuplot(out_path, schemes));
            return strict && any_failed(records) ? 2 : 0;
        }

        if (app.got_subcommand(cmd_analyze)) {
            const std::vector<SchemeChoice> schemes =
                parse_schemes(scheme_names, omega, ell, ordering);
            check_beta_pre(model, beta_single);
            const ManufacturedProblem prob =
                assemble_model(model, dim, run_cells, beta_single, contrast);
            write_output(out_path, analyses_json(prob.system, schemes, seed));
            return 0;
        }

        if (app.got_subcommand(cmd_converge)) {
            if (levels.empty()) {
                levels = dim == 1 ? std::vector<int>{64, 128, 256} : std::vector<int>{16, 32, 64};
            }
            if (levels.size() < 3) {
                throw std::invalid_argument("converge needs at least 3 grid levels (got " +
                                            std::to_string(levels.size()) + ")");
            }
            for (std::size_t i = 1; i < levels.size(); ++i) {
                if (levels[i] != 2 * levels[i - 1]) {
                    throw std::invalid_argument(
                        "converge needs dyadic levels (each level twice the previous, got " +
                        std::to_string(levels[i - 1]) + " then " + std::to_string(levels[i]) +
                        ")");
                }
            }
            check_beta_pre(model, beta_single);
            std::string out = "n_cells,err_u,err_v,order_u,order_v\n";
            double prev_u = 0.0, prev_v = 0.0;
            for (std::size_t i = 0; i < levels.size(); ++i) {
                const ManufacturedProblem prob =
                    assemble_model(model, dim, levels[i], beta_single, contrast);
                const auto [err_u, err_v] =
                    discrete_l2_error(monolithic_solve(prob.system), prob);
                out += std::to_string(levels[i]) + "," + format_full(err_u) + "," +
                       format_full(err_v) + ",";
                if (i > 0) {
                    out += format_full(std::log2(prev_u / err_u)) + "," +
                           format_full(std::log2(prev_v / err_v));
                } else {
                    out += ",";
                }
                out += "\n";
                prev_u = err_u;
                prev_v = err_v;
            }
            write_output(out_path, out);
            if (gnuplot) write_output(out_path + ".gp", converge_gnuplot(out_path));
            return 0;
        }

        // solve-mm
        const std::vector<SchemeChoice> schemes =
            parse_schemes(scheme_names, omega, ell, ordering);
        const BlockSystem sys = mm_read_block_system(mm_prefix);
        const double mm_tol = tol != 0.0 ? tol : 1e-8;
        std::optional<BlockVector> reference;
        try {
            reference = monolithic_solve(sys);
        } catch (const std::exception&) {
            reference = std::nullopt;
        }
        std::vector<RunRecord> records;
        records.reserve(schemes.size());
        for (const SchemeChoice& choice : schemes) {
            records.push_back(execute(sys, choice, mm_tol, max_iters, 0.0, sys.A.n_rows,
                                      reference ? &*reference : nullptr));
        }
        sort_records(records);
        write_output(out_path,
                     format == "json" ? records_json(records) : records_csv(records));
        return strict && any_failed(records) ? 2 : 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace blocksplit
