#include "cva/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace cva {

namespace {

std::string location(int line, const std::string& field) {
    std::string out = "config";
    if (line > 0)
        out += " line " + std::to_string(line);
    if (!field.empty())
        out += ", field '" + field + "'";
    return out;
}

} // namespace

ConfigError::ConfigError(int line, const std::string& field, const std::string& what)
    : InputError(location(line, field) + ": " + what), line_(line), field_(field) {}

namespace {

int line_of(const YAML::Node& n) { return n.IsDefined() && !n.Mark().is_null() ? n.Mark().line + 1 : 0; }

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

// Wraps a node with its dotted path so every diagnostic can name it.
struct Field {
    YAML::Node node;
    std::string path;
    int parent_line = 0;

    int line() const {
        int l = line_of(node);
        return l > 0 ? l : parent_line;
    }
    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line(), path, what); }

    bool has(const std::string& key) const { return node.IsMap() && node[key].IsDefined() && !node[key].IsNull(); }
    Field operator[](const std::string& key) const { return {node[key], join(path, key), line()}; }
    Field at(std::size_t i) const { return {node[i], path + "[" + std::to_string(i) + "]", line()}; }
    Field required(const std::string& key) const {
        if (!node.IsMap())
            fail("expected a mapping");
        if (!has(key))
            throw ConfigError(line(), join(path, key), "missing required field");
        return (*this)[key];
    }
    std::size_t size() const {
        if (!node.IsSequence())
            fail("expected a list");
        return node.size();
    }
    void allow_keys(std::initializer_list<const char*> keys) const {
        if (!node.IsMap())
            fail("expected a mapping");
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key))
                throw ConfigError(line_of(kv.first), join(path, key), "unknown field");
        }
    }
};

std::string text(const Field& f) {
    if (!f.node.IsScalar())
        f.fail("expected a scalar");
    return f.node.Scalar();
}

double parse_plain(const std::string& s, bool& ok) {
    ok = false;
    std::string t = s;
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c) != 0; }), t.end());
    std::string lower = t;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == ".inf" || lower == "+.inf" || lower == "inf" || lower == "+inf") {
        ok = true;
        return std::numeric_limits<double>::infinity();
    }
    if (lower == "-.inf" || lower == "-inf") {
        ok = true;
        return -std::numeric_limits<double>::infinity();
    }
    if (t.empty())
        return 0.0;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (errno != 0 || end != t.c_str() + t.size() || std::isnan(v))
        return 0.0;
    ok = true;
    return v;
}

// Plain decimal, "inf", or a ratio such as "7/365".
double number(const Field& f, bool allow_infinite = false) {
    const std::string s = text(f);
    bool ok = false;
    double v = 0.0;
    if (auto slash = s.find('/'); slash != std::string::npos) {
        bool ok_num = false;
        bool ok_den = false;
        const double num = parse_plain(s.substr(0, slash), ok_num);
        const double den = parse_plain(s.substr(slash + 1), ok_den);
        ok = ok_num && ok_den && std::isfinite(num) && std::isfinite(den) && den != 0.0;
        v = ok ? num / den : 0.0;
    } else {
        v = parse_plain(s, ok);
    }
    if (!ok)
        f.fail("expected a number, got '" + s + "'");
    if (!allow_infinite && !std::isfinite(v))
        f.fail("value must be finite");
    return v;
}

double number_or(const Field& parent, const std::string& key, double fallback, bool allow_infinite = false) {
    return parent.has(key) ? number(parent[key], allow_infinite) : fallback;
}

std::uint64_t integer(const Field& f) {
    const std::string s = text(f);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        f.fail("expected a non-negative integer, got '" + s + "'");
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
    if (errno == ERANGE)
        f.fail("integer out of range");
    return v;
}

bool flag(const Field& f) {
    const std::string s = text(f);
    if (s == "true" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "no" || s == "off")
        return false;
    f.fail("expected true or false, got '" + s + "'");
}

std::vector<double> numbers(const Field& f, bool allow_infinite = false) {
    std::vector<double> out;
    for (std::size_t i = 0; i < f.size(); ++i)
        out.push_back(number(f.at(i), allow_infinite));
    return out;
}

std::vector<std::string> names(const Field& f) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < f.size(); ++i)
        out.push_back(text(f.at(i)));
    return out;
}

template <class Fn>
auto guarded(const Field& f, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        f.fail(e.what());
    }
}

TermStructure parse_curve(const Field& f, CurveKind kind, const TermStructure* discount) {
    f.allow_keys({"flat", "horizon", "times", "rates", "cds"});
    return guarded(f, [&] {
        if (f.has("flat"))
            return TermStructure::flat(number(f["flat"]), number_or(f, "horizon", 100.0), kind);
        if (f.has("times"))
            return TermStructure(numbers(f["times"]), numbers(f.required("rates")), kind);
        if (f.has("cds")) {
            if (kind != CurveKind::hazard || discount == nullptr)
                f.fail("cds quotes only define hazard curves");
            Field q = f["cds"];
            q.allow_keys({"maturities", "spreads", "recovery"});
            CdsQuoteStrip strip{numbers(q.required("maturities")), numbers(q.required("spreads")),
                                number(q.required("recovery"))};
            return bootstrap_hazards(strip, *discount);
        }
        f.fail("curve needs one of 'flat', 'times'/'rates' or 'cds'");
    });
}

ProcessKind process_kind(const Field& f) {
    const std::string s = text(f);
    if (s == "cir")
        return ProcessKind::cir;
    if (s == "gbm")
        return ProcessKind::gbm;
    if (s == "bk")
        return ProcessKind::bk;
    f.fail("unknown process kind '" + s + "' (cir, gbm, bk)");
}

FactorRole factor_role(const Field& f) {
    const std::string s = text(f);
    if (s == "rate")
        return FactorRole::rate;
    if (s == "hazard_a")
        return FactorRole::hazard_a;
    if (s == "hazard_b")
        return FactorRole::hazard_b;
    if (s == "equity")
        return FactorRole::equity;
    if (s == "fx")
        return FactorRole::fx;
    if (s == "collateral")
        return FactorRole::collateral;
    f.fail("unknown role '" + s + "'");
}

void parse_valuation(const Field& f, RunConfig& cfg) {
    f.allow_keys({"credit", "timing", "dt", "rho", "cross_term"});
    if (f.has("credit")) {
        const std::string s = text(f["credit"]);
        if (s == "bilateral")
            cfg.regime.credit_side = CreditSide::bilateral;
        else if (s == "unilateral")
            cfg.regime.credit_side = CreditSide::unilateral_b;
        else
            f["credit"].fail("expected 'bilateral' or 'unilateral'");
    }
    if (f.has("timing")) {
        const std::string s = text(f["timing"]);
        if (s == "ctm")
            cfg.regime.timing = Timing::ctm;
        else if (s == "dtm")
            cfg.regime.timing = Timing::dtm;
        else
            f["timing"].fail("expected 'ctm' or 'dtm'");
    }
    cfg.lattice_dt = number_or(f, "dt", cfg.lattice_dt);
    if (!(cfg.lattice_dt > 0.0))
        f["dt"].fail("must be positive");
    cfg.rho = number_or(f, "rho", 0.0);
    if (cfg.rho < -1.0 || cfg.rho > 1.0)
        f["rho"].fail("must lie in [-1, 1]");
    if (f.has("cross_term")) {
        const std::string s = text(f["cross_term"]);
        if (s == "a_indexed")
            cfg.cross_term = CrossTermForm::a_indexed;
        else if (s == "appendix")
            cfg.cross_term = CrossTermForm::appendix_b_indexed;
        else
            f["cross_term"].fail("expected 'a_indexed' or 'appendix'");
    }
}

void parse_recovery(const Field& f, RunConfig& cfg) {
    f.allow_keys({"phi_a", "phi_b", "phibar_a", "phibar_b", "phi_ab"});
    RecoveryProfile& r = cfg.recovery;
    r.phi_a = number_or(f, "phi_a", r.phi_a);
    r.phi_b = number_or(f, "phi_b", r.phi_b);
    r.phibar_a = number_or(f, "phibar_a", r.phibar_a);
    r.phibar_b = number_or(f, "phibar_b", r.phibar_b);
    r.phi_ab = number_or(f, "phi_ab", r.phi_ab);
    guarded(f, [&] { r.validate(); });
}

void parse_schedules(const Field& f, RunConfig& cfg) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        Field s = f.at(i);
        s.allow_keys({"label", "payments", "bond"});
        NamedSchedule named;
        named.label = text(s.required("label"));
        if (s.has("payments")) {
            Field pays = s["payments"];
            std::vector<Payment> flows;
            for (std::size_t k = 0; k < pays.size(); ++k) {
                Field p = pays.at(k);
                if (p.size() != 2)
                    p.fail("payment must be [time, amount]");
                flows.push_back({number(p.at(0)), number(p.at(1))});
            }
            named.schedule = guarded(pays, [&] { return CashflowSchedule(flows); });
        } else if (s.has("bond")) {
            Field b = s["bond"];
            b.allow_keys({"principal", "coupon", "frequency", "maturity"});
            named.schedule = guarded(b, [&] {
                return CashflowSchedule::fixed_coupon_bond(number_or(b, "principal", 1.0), number(b.required("coupon")),
                                                           static_cast<int>(integer(b.required("frequency"))),
                                                           number(b.required("maturity")));
            });
        } else {
            s.fail("schedule needs 'payments' or 'bond'");
        }
        cfg.schedules.push_back(std::move(named));
    }
}

void parse_processes(const Field& f, RunConfig& cfg) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        Field p = f.at(i);
        p.allow_keys({"name", "kind", "role", "speed", "level", "vol", "initial", "drift"});
        ProcessSpec spec;
        spec.name = text(p.required("name"));
        spec.kind = process_kind(p.required("kind"));
        spec.role = factor_role(p.required("role"));
        spec.speed = number_or(p, "speed", 0.0);
        spec.level = number_or(p, "level", 0.0);
        spec.vol = number_or(p, "vol", 0.0);
        spec.initial = number(p.required("initial"));
        spec.drift = number_or(p, "drift", 0.0);
        guarded(p, [&] { spec.validate(); });
        for (const auto& other : cfg.processes) {
            if (other.name == spec.name)
                p["name"].fail("duplicate process name '" + spec.name + "'");
            if (other.role == spec.role && spec.role != FactorRole::equity && spec.role != FactorRole::fx)
                p["role"].fail("role already taken by '" + other.name + "'");
        }
        cfg.processes.push_back(spec);
    }
}

void parse_correlation(const Field& f, RunConfig& cfg) {
    f.allow_keys({"factors", "matrix", "pairs"});
    std::vector<std::string> factors = f.has("factors") ? names(f["factors"]) : std::vector<std::string>{};
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(factors.size()),
                                                  static_cast<Eigen::Index>(factors.size()));
    if (f.has("matrix")) {
        Field rows = f["matrix"];
        if (rows.size() != factors.size())
            rows.fail("matrix must have one row per factor");
        for (std::size_t i = 0; i < factors.size(); ++i) {
            Field row = rows.at(i);
            if (row.size() != factors.size())
                row.fail("matrix must be square");
            for (std::size_t j = 0; j < factors.size(); ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(row.at(j));
        }
    }
    CorrelationSpec spec = guarded(f, [&] { return CorrelationSpec(factors, m); });
    if (f.has("pairs")) {
        Field pairs = f["pairs"];
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            Field p = pairs.at(i);
            if (p.size() != 3)
                p.fail("pair must be [factor, factor, correlation]");
            spec = guarded(p, [&] { return spec.with(text(p.at(0)), text(p.at(1)), number(p.at(2))); });
        }
    }
    cfg.correlation = spec;
}

void parse_grid(const Field& f, RunConfig& cfg, double margin_period) {
    f.allow_keys({"buckets", "times", "margin_period"});
    const double zeta = number_or(f, "margin_period", margin_period);
    cfg.grid = guarded(f, [&] {
        if (f.has("times"))
            return TimeBucketGrid(numbers(f["times"]), zeta);
        Field b = f.required("buckets");
        b.allow_keys({"step", "horizon"});
        return TimeBucketGrid::regular(number(b.required("step")), number(b.required("horizon")), zeta);
    });
}

void parse_portfolio(const Field& f, RunConfig& cfg) {
    f.allow_keys({"netting", "swaps", "equity_swaps", "forwards", "fixed_flows"});
    Portfolio& pf = cfg.portfolio;
    pf.netting = f.has("netting") ? flag(f["netting"]) : true;
    if (f.has("swaps")) {
        Field swaps = f["swaps"];
        for (std::size_t i = 0; i < swaps.size(); ++i) {
            Field s = swaps.at(i);
            s.allow_keys({"label", "notional", "fixed_rate", "pay_fixed", "start", "maturity", "frequency"});
            pf.swaps.push_back(guarded(s, [&] {
                return SwapSpec::regular(s.has("label") ? text(s["label"]) : "swap" + std::to_string(i),
                                         number(s.required("notional")), number(s.required("fixed_rate")),
                                         s.has("pay_fixed") ? flag(s["pay_fixed"]) : true, number_or(s, "start", 0.0),
                                         number(s.required("maturity")),
                                         static_cast<int>(integer(s.required("frequency"))));
            }));
        }
    }
    if (f.has("equity_swaps")) {
        Field swaps = f["equity_swaps"];
        for (std::size_t i = 0; i < swaps.size(); ++i) {
            Field s = swaps.at(i);
            s.allow_keys({"label", "factor", "notional", "fixed_rate", "pay_equity", "dates", "start", "maturity",
                          "frequency"});
            EquitySwapSpec e;
            e.label = s.has("label") ? text(s["label"]) : "equity_swap" + std::to_string(i);
            e.factor = text(s.required("factor"));
            e.notional = number(s.required("notional"));
            e.fixed_rate = number_or(s, "fixed_rate", 0.0);
            e.pay_equity = s.has("pay_equity") ? flag(s["pay_equity"]) : true;
            if (s.has("dates")) {
                e.dates = numbers(s["dates"]);
            } else {
                const double start = number_or(s, "start", 0.0);
                const double maturity = number(s.required("maturity"));
                const auto freq = integer(s.required("frequency"));
                if (freq == 0 || !(maturity > start))
                    s.fail("equity swap needs start < maturity and positive frequency");
                const double periods = std::round((maturity - start) * static_cast<double>(freq));
                for (int k = 0; k <= static_cast<int>(periods); ++k)
                    e.dates.push_back(k == static_cast<int>(periods) ? maturity
                                                                     : start + k / static_cast<double>(freq));
            }
            guarded(s, [&] { e.validate(); });
            pf.equity_swaps.push_back(std::move(e));
        }
    }
    if (f.has("forwards")) {
        Field fw = f["forwards"];
        for (std::size_t i = 0; i < fw.size(); ++i) {
            Field s = fw.at(i);
            s.allow_keys({"label", "factor", "notional", "strike", "maturity"});
            pf.forwards.push_back({s.has("label") ? text(s["label"]) : "forward" + std::to_string(i),
                                   text(s.required("factor")), number(s.required("notional")),
                                   number(s.required("strike")), number(s.required("maturity"))});
        }
    }
    if (f.has("fixed_flows")) {
        Field ff = f["fixed_flows"];
        for (std::size_t i = 0; i < ff.size(); ++i) {
            Field s = ff.at(i);
            s.allow_keys({"label", "time", "amount"});
            pf.fixed_flows.push_back({s.has("label") ? text(s["label"]) : "flow" + std::to_string(i),
                                      number(s.required("time")), number(s.required("amount"))});
        }
    }
}

void parse_margin(const Field& f, RunConfig& cfg) {
    f.allow_keys({"th_a", "mta_a", "th_b", "mta_b", "margin_period"});
    MarginAgreement m;
    m.th_a = number_or(f, "th_a", m.th_a, true);
    m.mta_a = number_or(f, "mta_a", 0.0);
    m.th_b = number_or(f, "th_b", m.th_b, true);
    m.mta_b = number_or(f, "mta_b", 0.0);
    m.margin_period = number_or(f, "margin_period", m.margin_period);
    guarded(f, [&] { m.validate(); });
    cfg.margin = m;
}

void parse_sweep(const Field& f, RunConfig& cfg) {
    f.allow_keys({"h_b", "h_a", "wrongway"});
    if (f.has("h_b"))
        cfg.sweep.h_b = numbers(f["h_b"], true);
    if (f.has("h_a"))
        cfg.sweep.h_a = numbers(f["h_a"], true);
    for (double h : cfg.sweep.h_b)
        if (h < 0.0)
            f["h_b"].fail("H_B values must be non-negative");
    for (double h : cfg.sweep.h_a)
        if (h > 0.0)
            f["h_a"].fail("H_A values must be non-positive");
    if (f.has("wrongway")) {
        Field w = f["wrongway"];
        w.allow_keys({"factor_a", "factor_b", "values"});
        cfg.sweep.wrongway =
            WrongWaySweep{text(w.required("factor_a")), text(w.required("factor_b")), numbers(w.required("values"))};
    }
}

void cross_check(const Field& root, RunConfig& cfg) {
    std::vector<std::string> known;
    for (const auto& p : cfg.processes)
        known.push_back(p.name);
    auto require = [&](const std::string& name, const std::string& field) {
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError(root.line(), field, "refers to unknown factor '" + name + "'");
    };
    for (const auto& n : cfg.correlation.factors())
        require(n, "correlation.factors");
    for (const auto& e : cfg.portfolio.equity_swaps)
        require(e.factor, "portfolio.equity_swaps.factor");
    for (const auto& fw : cfg.portfolio.forwards)
        require(fw.factor, "portfolio.forwards.factor");
    for (const auto& n : cfg.regression.factors)
        require(n, "regression.factors");
    if (cfg.sweep.wrongway) {
        require(cfg.sweep.wrongway->factor_a, "sweep.wrongway.factor_a");
        require(cfg.sweep.wrongway->factor_b, "sweep.wrongway.factor_b");
    }
    if (cfg.margin && cfg.grid && std::abs(cfg.margin->margin_period - cfg.grid->margin_period()) > 1e-12)
        throw ConfigError(root.line(), "grid.margin_period", "differs from margin.margin_period");
    if (cfg.margin && cfg.margin->active() && !cfg.portfolio.netting)
        throw ConfigError(root.line(), "margin", "collateral requires portfolio.netting: true");
}

} // namespace

MonteCarloJob RunConfig::monte_carlo_job() const {
    if (!grid)
        throw ConfigError(0, "grid", "Monte-Carlo commands need a grid section");
    if (portfolio.empty())
        throw ConfigError(0, "portfolio", "Monte-Carlo commands need a non-empty portfolio");
    if (processes.empty())
        throw ConfigError(0, "processes", "Monte-Carlo commands need at least one process");
    MonteCarloJob job;
    job.processes = processes;
    job.correlation = correlation;
    job.grid = *grid;
    job.paths = paths;
    job.seed = seed;
    job.workers = workers;
    job.discount = discount;
    job.hazard_a = hazard_a;
    job.hazard_b = hazard_b;
    job.portfolio = portfolio;
    job.margin = margin;
    job.xva.credit_side = regime.credit_side;
    job.xva.recovery = recovery;
    job.xva.rho = rho;
    job.xva.cross_term = cross_term;
    job.xva.regression = regression;
    return job;
}

RunConfig parse_config(const std::string& source) {
    YAML::Node doc;
    try {
        doc = YAML::Load(source);
    } catch (const YAML::Exception& e) {
        throw ConfigError(e.mark.is_null() ? 0 : e.mark.line + 1, "", e.msg);
    }
    Field root{doc, "", 1};
    if (!doc.IsMap())
        root.fail("top level must be a mapping");
    root.allow_keys({"seed", "paths", "workers", "valuation", "recovery", "curves", "schedules", "grid", "processes",
                     "correlation", "portfolio", "margin", "regression", "sweep"});

    RunConfig cfg;
    cfg.seed = integer(root.required("seed"));
    if (root.has("paths")) {
        cfg.paths = integer(root["paths"]);
        if (cfg.paths == 0)
            root["paths"].fail("must be at least 1");
    }
    if (root.has("workers"))
        cfg.workers = integer(root["workers"]);
    if (root.has("valuation"))
        parse_valuation(root["valuation"], cfg);
    if (root.has("recovery"))
        parse_recovery(root["recovery"], cfg);
    if (root.has("curves")) {
        Field c = root["curves"];
        c.allow_keys({"discount", "hazard_a", "hazard_b"});
        if (c.has("discount"))
            cfg.discount = parse_curve(c["discount"], CurveKind::interest, nullptr);
        if (c.has("hazard_a"))
            cfg.hazard_a = parse_curve(c["hazard_a"], CurveKind::hazard, &cfg.discount);
        if (c.has("hazard_b"))
            cfg.hazard_b = parse_curve(c["hazard_b"], CurveKind::hazard, &cfg.discount);
    }
    if (root.has("schedules"))
        parse_schedules(root["schedules"], cfg);
    if (root.has("margin"))
        parse_margin(root["margin"], cfg);
    if (root.has("grid"))
        parse_grid(root["grid"], cfg, cfg.margin ? cfg.margin->margin_period : 0.0);
    if (root.has("processes"))
        parse_processes(root["processes"], cfg);
    if (root.has("correlation"))
        parse_correlation(root["correlation"], cfg);
    if (root.has("portfolio"))
        parse_portfolio(root["portfolio"], cfg);
    if (root.has("regression")) {
        Field r = root["regression"];
        r.allow_keys({"degree", "factors"});
        if (r.has("degree"))
            cfg.regression.degree = static_cast<int>(integer(r["degree"]));
        if (r.has("factors"))
            cfg.regression.factors = names(r["factors"]);
    }
    if (root.has("sweep"))
        parse_sweep(root["sweep"], cfg);
    cross_check(root, cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(0, "", "cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace cva
