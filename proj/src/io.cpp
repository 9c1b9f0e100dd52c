#include "levyconj/io.hpp"

#include <fstream>

#include "levyconj/classes.hpp"
#include "levyconj/expression.hpp"

namespace levyconj {

using nlohmann::json;

namespace {

json extended(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

double extended_from(const json& j, double dflt = kInf) {
    if (j.is_null()) return dflt;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
        if (s == "-inf") return -kInf;
        throw std::invalid_argument("expected a number or \"inf\", got \"" + s + "\"");
    }
    return j.get<double>();
}

json density_to_json(const RadialDensity& d) {
    json out;
    if (std::holds_alternative<std::monostate>(d)) {
        out["type"] = "none";
        return out;
    }
    if (const auto* p = std::get_if<PowerLawDensity>(&d)) {
        out["type"] = "power_law";
        out["c"] = p->coeff;
        out["beta"] = p->beta;
        out["r_lo"] = p->r_lo;
        out["r_hi"] = extended(p->r_hi);
        return out;
    }
    if (const auto* a = std::get_if<AnalyticDensity>(&d)) {
        if (a->expr.empty())
            throw std::invalid_argument(
                "analytic density has no expression form and cannot be serialized");
        out["type"] = "analytic";
        out["expr"] = a->expr;
        out["r_lo"] = a->r_lo;
        out["r_hi"] = extended(a->r_hi);
        out["theta0"] = a->theta0;
        out["thetainf"] = extended(a->thetainf);
        return out;
    }
    const auto& g = std::get<GridDensity>(d);
    out["type"] = "grid";
    json nodes = json::array(), values = json::array();
    for (std::size_t i = 0; i < g.log_nodes.size(); ++i) {
        nodes.push_back(std::exp(g.log_nodes[i]));
        values.push_back(g.values[i]);
    }
    out["nodes"] = nodes;
    out["values"] = values;
    out["ext_lo"] = g.ext_lo;
    out["ext_hi"] = g.ext_hi;
    out["r_lo"] = g.r_lo;
    out["r_hi"] = extended(g.r_hi);
    return out;
}

RadialDensity density_from_json(const json& j) {
    if (j.is_null()) return std::monostate{};
    const std::string type = j.value("type", "none");
    if (type == "none") return std::monostate{};
    if (type == "power_law") {
        PowerLawDensity p;
        p.coeff = j.at("c").get<double>();
        p.beta = j.at("beta").get<double>();
        p.r_lo = j.contains("r_lo") ? extended_from(j["r_lo"], 0.0) : 0.0;
        p.r_hi = j.contains("r_hi") ? extended_from(j["r_hi"]) : kInf;
        return p;
    }
    if (type == "analytic") {
        AnalyticDensity a;
        a.expr = j.at("expr").get<std::string>();
        a.eval = compile_expression(a.expr);
        a.r_lo = j.contains("r_lo") ? extended_from(j["r_lo"], 0.0) : 0.0;
        a.r_hi = j.contains("r_hi") ? extended_from(j["r_hi"]) : kInf;
        a.theta0 = j.value("theta0", 0.0);
        a.thetainf = j.contains("thetainf") ? extended_from(j["thetainf"]) : kInf;
        return a;
    }
    if (type == "grid") {
        GridDensity g;
        for (const auto& r : j.at("nodes")) g.log_nodes.push_back(std::log(r.get<double>()));
        for (const auto& v : j.at("values")) g.values.push_back(v.get<double>());
        if (g.log_nodes.size() != g.values.size() || g.log_nodes.empty())
            throw std::invalid_argument("grid density: nodes/values size mismatch");
        g.ext_lo = j.value("ext_lo", 0.0);
        g.ext_hi = j.value("ext_hi", -40.0);
        g.r_lo = j.contains("r_lo") ? extended_from(j["r_lo"], 0.0) : 0.0;
        g.r_hi = j.contains("r_hi") ? extended_from(j["r_hi"]) : kInf;
        return g;
    }
    throw std::invalid_argument("unknown density type \"" + type + "\"");
}

GammaRepresentation repr_from_string(const std::string& s) {
    if (s == "cut1") return GammaRepresentation::cut1;
    if (s == "cut1_sharp") return GammaRepresentation::cut1_sharp;
    if (s == "cut1_open") return GammaRepresentation::cut1_open;
    if (s == "cut1_half") return GammaRepresentation::cut1_half;
    if (s == "rr") return GammaRepresentation::rr;
    if (s == "drift") return GammaRepresentation::drift;
    if (s == "mean") return GammaRepresentation::mean;
    throw std::invalid_argument("unknown gamma representation \"" + s + "\"");
}

const char* kind_name(IntegralKind k) {
    switch (k) {
        case IntegralKind::finite: return "finite";
        case IntegralKind::infinite: return "infinite";
        case IntegralKind::inconclusive: return "inconclusive";
    }
    return "?";
}

}  // namespace

json to_json(const Triplet& t) {
    json out;
    const int d = t.dimension();
    out["dimension"] = d;
    json gauss = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int j = 0; j < d; ++j) row.push_back(t.gaussian.at(i, j));
        gauss.push_back(row);
    }
    out["gaussian"] = gauss;
    out["gamma"] = t.gamma;
    out["gamma_repr"] = to_string(t.repr);
    json levy = json::array();
    for (const auto& comp : t.levy.components) {
        json c;
        c["xi"] = comp.xi.coords();
        c["weight"] = comp.weight;
        json atoms = json::array();
        for (const auto& a : comp.radial.atoms) atoms.push_back(json::array({a.r, a.mass}));
        c["atoms"] = atoms;
        c["density"] = density_to_json(comp.radial.density);
        levy.push_back(c);
    }
    out["levy"] = levy;
    if (!t.stable_exponents.empty()) {
        json meta = json::array();
        for (const auto& e : t.stable_exponents)
            meta.push_back(json{{"beta", e.beta}, {"mass", e.mass}});
        out["stable_exponents"] = meta;
    }
    return out;
}

Triplet triplet_from_json(const json& j) {
    const int d = j.at("dimension").get<int>();
    SymMatrix a(d);
    if (j.contains("gaussian") && !j["gaussian"].is_null()) {
        const auto& g = j["gaussian"];
        for (int i = 0; i < d; ++i)
            for (int c = 0; c < d; ++c)
                a.at(i, c) = g.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c))
                                 .get<double>();
    }
    LevyMeasure nu;
    nu.dimension = d;
    if (j.contains("levy")) {
        for (const auto& cj : j["levy"]) {
            std::vector<double> xi = cj.at("xi").get<std::vector<double>>();
            LevyComponent comp{Direction(xi), cj.value("weight", 1.0), {}};
            if (cj.contains("atoms"))
                for (const auto& aj : cj["atoms"])
                    comp.radial.atoms.push_back(
                        {aj.at(0).get<double>(), aj.at(1).get<double>()});
            if (cj.contains("density")) comp.radial.density = density_from_json(cj["density"]);
            nu.components.push_back(std::move(comp));
        }
    }
    std::vector<double> gamma = j.at("gamma").get<std::vector<double>>();
    GammaRepresentation repr = repr_from_string(j.value("gamma_repr", "cut1"));
    Triplet t = make_triplet(std::move(a), std::move(nu), std::move(gamma), repr);
    if (j.contains("stable_exponents"))
        for (const auto& e : j["stable_exponents"])
            t.stable_exponents.push_back(
                {e.at("beta").get<double>(), e.at("mass").get<double>()});
    return t;
}

json to_json(const MappingKernel& k) {
    json out;
    const auto& fam = k.family();
    if (const auto* bp = std::get_if<BarPhiFamily>(&fam)) {
        out["family"] = "bar_phi";
        out["p"] = bp->p;
        out["alpha"] = bp->alpha;
    } else if (const auto* lq = std::get_if<LambdaQFamily>(&fam)) {
        out["family"] = "lambda_q";
        out["q"] = lq->q;
        out["alpha"] = lq->alpha;
    } else if (const auto* ps = std::get_if<PsiFamily>(&fam)) {
        out["family"] = "psi";
        out["alpha"] = ps->alpha;
        out["beta"] = ps->beta;
    } else if (std::holds_alternative<GaussTypeGFamily>(fam)) {
        out["family"] = "gauss_type_g";
    } else if (const auto* cc = std::get_if<CustomCFamily>(&fam)) {
        if (cc->expr.empty())
            throw std::invalid_argument("custom kernel without expression form");
        out["family"] = "custom_c";
        out["a"] = cc->a;
        out["b"] = extended(cc->b);
        out["h"] = cc->expr;
    } else {
        const auto& cd = std::get<CustomDFamily>(fam);
        if (cd.expr.empty())
            throw std::invalid_argument("custom kernel without expression form");
        out["family"] = "custom_d";
        out["h"] = cd.expr;
    }
    if (k.conjugated()) out["conjugated"] = true;
    // derived facts, informational
    out["a_h"] = extended(k.a());
    out["b_h"] = extended(k.b());
    out["c_h"] = extended(k.c());
    switch (k.condition()) {
        case ConditionClass::c1: out["condition"] = "C1"; break;
        case ConditionClass::c2: out["condition"] = "C2"; break;
        case ConditionClass::c1_and_c2: out["condition"] = "C1&C2"; break;
        case ConditionClass::d: out["condition"] = "D"; break;
    }
    return out;
}

MappingKernel kernel_from_json(const json& j) {
    const std::string fam = j.at("family").get<std::string>();
    const bool conj = j.value("conjugated", false);
    if (fam == "bar_phi")
        return MappingKernel::build(
            BarPhiFamily{j.at("p").get<double>(), j.at("alpha").get<double>()}, conj);
    if (fam == "lambda_q")
        return MappingKernel::build(
            LambdaQFamily{j.at("q").get<double>(), j.at("alpha").get<double>()}, conj);
    if (fam == "psi")
        return MappingKernel::build(
            PsiFamily{j.at("alpha").get<double>(), j.at("beta").get<double>()}, conj);
    if (fam == "gauss_type_g") return MappingKernel::build(GaussTypeGFamily{}, conj);
    if (fam == "custom_c") {
        CustomCFamily cc;
        cc.expr = j.at("h").get<std::string>();
        cc.h = compile_expression(cc.expr);
        cc.a = extended_from(j.at("a"), 0.0);
        cc.b = extended_from(j.at("b"));
        return MappingKernel::build(cc, conj);
    }
    if (fam == "custom_d") {
        CustomDFamily cd;
        cd.expr = j.at("h").get<std::string>();
        cd.h = compile_expression(cd.expr);
        return MappingKernel::build(cd, conj);
    }
    throw std::invalid_argument("unknown kernel family \"" + fam + "\"");
}

json to_json(const ValidationReport& r) {
    json out;
    out["ok"] = r.ok;
    json comps = json::array();
    for (const auto& c : r.components)
        comps.push_back(json{{"index", c.index},
                             {"kind", kind_name(c.kind)},
                             {"square_one_integral", c.square_one_integral}});
    out["components"] = comps;
    out["problems"] = r.problems;
    return out;
}

json to_json(const MomentReport& r) {
    json out;
    out["has_drift"] = r.has_drift;
    if (r.drift) out["drift"] = *r.drift;
    out["has_mean"] = r.has_mean;
    if (r.mean) out["mean"] = *r.mean;
    json wm;
    switch (r.weak_mean.status) {
        case WeakMeanStatus::exists: wm["status"] = "exists"; break;
        case WeakMeanStatus::exists_absolutely: wm["status"] = "exists_absolutely"; break;
        case WeakMeanStatus::none: wm["status"] = "none"; break;
        case WeakMeanStatus::inconclusive: wm["status"] = "inconclusive"; break;
    }
    if (!r.weak_mean.value.empty()) wm["value"] = r.weak_mean.value;
    out["weak_mean"] = wm;
    json fm = json::array();
    for (const auto& m : r.fractional_moments)
        fm.push_back(json{{"alpha", m.alpha},
                          {"region", m.region == Region::inner ? "inner" : "outer"},
                          {"kind", kind_name(m.kind)},
                          {"value", extended(m.value)}});
    out["fractional_moments"] = fm;
    return out;
}

namespace {
json evidence_json(const std::vector<Evidence>& ev) {
    json out = json::array();
    for (const auto& e : ev)
        out.push_back(json{{"name", e.name},
                           {"kind", kind_name(e.kind)},
                           {"value", extended(e.value)}});
    return out;
}
}  // namespace

json to_json(const DomainReport& r) {
    return json{{"in_essential", to_string(r.in_de)},
                {"in_plain", to_string(r.in_d)},
                {"in_absolute", to_string(r.in_d0)},
                {"evidence", evidence_json(r.evidence)}};
}

json to_json(const RangeReport& r) {
    json rays = json::array();
    for (const auto& ray : r.rays)
        rays.push_back(json{{"worst_violation", ray.worst_violation}});
    return json{{"verdict", to_string(r.verdict)},
                {"essential", to_string(r.essential)},
                {"absolute", to_string(r.absolute)},
                {"order", r.order},
                {"rays", rays},
                {"side_conditions", evidence_json(r.side_conditions)},
                {"note", r.note}};
}

json to_json(const SemistableReport& r) {
    json spans = json::array();
    for (const auto& s : r.spans)
        spans.push_back(
            json{{"b", s.b}, {"pass", s.pass}, {"max_rel_dev", s.max_rel_dev}});
    return json{{"alpha", r.alpha}, {"spans", spans}, {"all_pass", r.all_pass}};
}

json to_json(const DiscrepancyReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back(json{{"z", row.z},
                            {"ecf_re", row.ecf.real()},
                            {"ecf_im", row.ecf.imag()},
                            {"analytic_re", row.analytic.real()},
                            {"analytic_im", row.analytic.imag()},
                            {"stderr", row.stderr_boot},
                            {"abs_diff", row.abs_diff}});
    return json{{"sup", r.sup}, {"frac_within_2se", r.frac_within_2se}, {"rows", rows}};
}

namespace {
json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    json j;
    in >> j;
    return j;
}
}  // namespace

Triplet load_triplet(const std::string& path) { return triplet_from_json(read_file(path)); }
MappingKernel load_kernel(const std::string& path) { return kernel_from_json(read_file(path)); }

}  // namespace levyconj
