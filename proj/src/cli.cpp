#include "levyconj/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "levyconj/classes.hpp"
#include "levyconj/charfn.hpp"
#include "levyconj/io.hpp"

namespace levyconj::cli {

namespace {

using nlohmann::json;

struct Output {
    std::string path;  // empty = stdout
    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text << "\n";
        } else {
            std::ofstream out(path);
            if (!out) throw std::invalid_argument("cannot write " + path);
            out << text << "\n";
        }
    }
};

json with_provenance(json body, const json& input_echo) {
    body["tool"] = "levyconj";
    body["version"] = kVersion;
    body["input"] = input_echo;
    return body;
}

int default_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("LEVY_CONJ_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::yes: return 0;
        case Verdict::no: return 1;
        case Verdict::inconclusive: return 2;
    }
    return 2;
}

std::vector<std::vector<double>> axis_grid(const std::vector<double>& axis, double z_min,
                                           double z_max, int count) {
    std::vector<std::vector<double>> grid;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? z_min : z_min + (z_max - z_min) * i / (count - 1.0);
        std::vector<double> z(axis.size());
        for (std::size_t c = 0; c < axis.size(); ++c) z[c] = t * axis[c];
        grid.push_back(z);
    }
    return grid;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"levyconj: triplet inversions and conjugate stochastic integral mappings"};
    app.require_subcommand(1);
    int threads_flag = 0;
    app.add_option("--threads", threads_flag, "worker threads (env LEVY_CONJ_THREADS)");

    std::string in_path, out_path, kernel_path, format = "json";
    double tol = 1e-9;

    auto* c_validate = app.add_subcommand("validate", "validate a triplet's Levy measure");
    c_validate->add_option("--in", in_path, "triplet JSON")->required();
    c_validate->add_option("--out", out_path, "report destination");

    auto* c_invert = app.add_subcommand("invert", "inversion of an ID0 triplet");
    c_invert->add_option("--in", in_path)->required();
    c_invert->add_option("--out", out_path);

    auto* c_conj = app.add_subcommand("conjugate", "conjugate of a mapping kernel");
    c_conj->add_option("--kernel", kernel_path)->required();
    c_conj->add_option("--out", out_path);

    auto* c_map = app.add_subcommand("map", "apply a stochastic integral mapping");
    c_map->add_option("--kernel", kernel_path)->required();
    c_map->add_option("--in", in_path)->required();
    c_map->add_option("--out", out_path);

    int iterate_n = 1;
    auto* c_iter = app.add_subcommand("iterate", "iterate a mapping n times");
    c_iter->add_option("--kernel", kernel_path)->required();
    c_iter->add_option("--in", in_path)->required();
    c_iter->add_option("-n,--times", iterate_n, "iteration count")->required();
    c_iter->add_option("--out", out_path);

    std::string what = "domain", variant = "L";
    double alpha = 0.0;
    auto* c_check = app.add_subcommand("check", "domain / range / class membership");
    c_check->add_option("--what", what, "domain|range|class")->required();
    c_check->add_option("--kernel", kernel_path, "kernel JSON (domain/range)");
    c_check->add_option("--in", in_path)->required();
    c_check->add_option("--alpha", alpha, "class parameter");
    c_check->add_option("--variant", variant, "L|Lstar");
    c_check->add_option("--tol", tol);
    c_check->add_option("--out", out_path);

    double z_min = -5.0, z_max = 5.0;
    int z_count = 101;
    std::vector<double> z_axis;
    auto* c_charfn = app.add_subcommand("charfn", "cumulant values on a z-grid (CSV)");
    c_charfn->add_option("--in", in_path)->required();
    c_charfn->add_option("--kernel", kernel_path, "evaluate the mapped cumulant instead");
    c_charfn->add_option("--z-min", z_min);
    c_charfn->add_option("--z-max", z_max);
    c_charfn->add_option("--z-count", z_count);
    c_charfn->add_option("--z-axis", z_axis, "direction of the z-grid (defaults to e1)");
    c_charfn->add_option("--out", out_path);

    std::size_t n_samples = 10000;
    double step = 1e-3, eps = 1e-3;
    double q_max_flag = 0.0, p_min_flag = 0.0;
    std::uint64_t seed = 0;
    std::string policy = "drop", discrepancy_out;
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo sampling of the mapped law");
    c_sim->add_option("--kernel", kernel_path)->required();
    c_sim->add_option("--in", in_path)->required();
    c_sim->add_option("--n", n_samples);
    c_sim->add_option("--step", step);
    c_sim->add_option("--q-max", q_max_flag);
    c_sim->add_option("--p-min", p_min_flag);
    c_sim->add_option("--eps", eps);
    c_sim->add_option("--policy", policy, "drop|gaussian");
    c_sim->add_option("--seed", seed);
    c_sim->add_option("--out", out_path, "sample CSV (one sample per row)");
    c_sim->add_option("--discrepancy", discrepancy_out, "write cf-discrepancy report JSON");
    c_sim->add_option("--z-min", z_min);
    c_sim->add_option("--z-max", z_max);
    c_sim->add_option("--z-count", z_count);

    std::vector<const char*> argv;
    argv.push_back("levyconj");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help();
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 3;
    }

    Output out{out_path};
    try {
        if (*c_validate) {
            Triplet t = load_triplet(in_path);
            ValidationReport rep = validate_measure(t.levy);
            out.write(with_provenance(to_json(rep), json{{"in", in_path}}).dump(2));
            return rep.ok ? 0 : 1;
        }
        if (*c_invert) {
            Triplet t = load_triplet(in_path);
            out.write(to_json(invert(t)).dump(2));
            return 0;
        }
        if (*c_conj) {
            MappingKernel k = load_kernel(kernel_path);
            out.write(to_json(k.conjugate()).dump(2));
            return 0;
        }
        if (*c_map) {
            MappingKernel k = load_kernel(kernel_path);
            Triplet t = load_triplet(in_path);
            out.write(to_json(apply_mapping(k, t)).dump(2));
            return 0;
        }
        if (*c_iter) {
            MappingKernel k = load_kernel(kernel_path);
            Triplet t = load_triplet(in_path);
            out.write(to_json(iterate_mapping(k, t, iterate_n)).dump(2));
            return 0;
        }
        if (*c_check) {
            Triplet t = load_triplet(in_path);
            const json echo{{"in", in_path}, {"kernel", kernel_path}, {"what", what}};
            if (what == "domain") {
                MappingKernel k = load_kernel(kernel_path);
                DomainReport rep = check_domain(k, t);
                out.write(with_provenance(to_json(rep), echo).dump(2));
                return verdict_exit(rep.in_de == Verdict::yes ? rep.in_d : rep.in_de);
            }
            if (what == "range") {
                MappingKernel k = load_kernel(kernel_path);
                RangeReport rep = check_range(k, t);
                out.write(with_provenance(to_json(rep), echo).dump(2));
                return verdict_exit(rep.verdict);
            }
            if (what == "class") {
                ClassVariant v = variant == "Lstar" ? ClassVariant::Lstar : ClassVariant::L;
                ClassReport rep = class_membership(t, alpha, v);
                json body{{"verdict", rep.verdict == 1 ? "yes"
                                                       : (rep.verdict == -1 ? "no"
                                                                            : "inconclusive")},
                          {"alpha", alpha},
                          {"variant", variant},
                          {"note", rep.note}};
                json rays = json::array();
                for (const auto& r : rep.rays)
                    rays.push_back(json{{"worst_violation", r.worst_violation},
                                        {"location", r.location}});
                body["rays"] = rays;
                out.write(with_provenance(body, echo).dump(2));
                return rep.verdict == 1 ? 0 : (rep.verdict == -1 ? 1 : 2);
            }
            std::cerr << "check: unknown --what " << what << "\n";
            return 3;
        }
        if (*c_charfn) {
            Triplet t = load_triplet(in_path);
            const int d = t.dimension();
            if (z_axis.empty()) {
                z_axis.assign(static_cast<std::size_t>(d), 0.0);
                z_axis[0] = 1.0;
            }
            if (z_axis.size() != static_cast<std::size_t>(d))
                throw std::invalid_argument("charfn: --z-axis dimension mismatch");
            std::optional<MappingKernel> k;
            if (!kernel_path.empty()) k = load_kernel(kernel_path);
            std::ostringstream csv;
            for (int c = 1; c <= d; ++c) csv << "z_" << c << ",";
            csv << "re_C,im_C,abs_error_estimate\n";
            for (const auto& z : axis_grid(z_axis, z_min, z_max, z_count)) {
                CumulantResult r = k ? mapped_cumulant(*k, t, z) : cumulant(t, z);
                for (double zc : z) csv << zc << ",";
                csv << r.value.real() << "," << r.value.imag() << "," << r.abs_error << "\n";
            }
            out.write(csv.str());
            return 0;
        }
        if (*c_sim) {
            MappingKernel k = load_kernel(kernel_path);
            Triplet t = load_triplet(in_path);
            SimConfig cfg;
            cfg.n_samples = n_samples;
            cfg.step = step;
            if (q_max_flag > 0.0) cfg.q_max = q_max_flag;
            if (p_min_flag > 0.0) cfg.p_min = p_min_flag;
            cfg.eps = eps;
            cfg.policy = policy == "gaussian" ? SmallJumpPolicy::gaussian_substitute
                                              : SmallJumpPolicy::drop_recompensate;
            cfg.seed = seed;
            cfg.threads = default_threads(threads_flag);
            SampleBatch batch = sample_mapped(k, t, cfg);
            if (!out_path.empty() || discrepancy_out.empty()) {
                std::ostringstream csv;
                for (int c = 1; c <= batch.dimension; ++c)
                    csv << "x_" << c << (c < batch.dimension ? "," : "");
                csv << "\n";
                for (std::size_t i = 0; i < batch.n; ++i) {
                    for (int c = 0; c < batch.dimension; ++c)
                        csv << batch.at(i, c) << (c + 1 < batch.dimension ? "," : "");
                    csv << "\n";
                }
                out.write(csv.str());
            }
            if (!discrepancy_out.empty()) {
                std::vector<double> axis(static_cast<std::size_t>(batch.dimension), 0.0);
                axis[0] = 1.0;
                DiscrepancyReport rep =
                    cf_discrepancy(k, t, cfg, axis_grid(axis, z_min, z_max, z_count));
                json echo{{"in", in_path},
                          {"kernel", kernel_path},
                          {"n", n_samples},
                          {"step", step},
                          {"eps", eps},
                          {"seed", seed}};
                Output dout{discrepancy_out};
                dout.write(with_provenance(to_json(rep), echo).dump(2));
            }
            return 0;
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const NotDefinableError& e) {
        std::cerr << "not definable: " << e.what() << "\n";
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 3;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace levyconj::cli
