// pnml command-line front end. Every subcommand prints one JSON document
// {"config", "results", "version"} (or CSV for tabular results) and exits 0;
// configuration errors exit 2 and numerical failures exit 3, each with a
// single-line JSON error on stderr.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pnml/adversarial.hpp"
#include "pnml/data.hpp"
#include "pnml/dial.hpp"
#include "pnml/error.hpp"
#include "pnml/experiments.hpp"
#include "pnml/luckiness.hpp"
#include "pnml/metrics.hpp"
#include "pnml/overparam.hpp"
#include "pnml/regression.hpp"
#include "pnml/softmax.hpp"

using json = nlohmann::json;
using namespace pnml;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::uint64_t seed = 42;
    std::string output;
    std::string format = "json";
};

// Train/test inputs shared by the regression subcommands.
struct RegressionInputs {
    std::string train;
    std::string test;
    std::string target;
    double test_fraction = 0.0;
    std::string split_column;
    std::optional<double> split_threshold;
    std::string feature_map = "identity";
    int degree = 1;
    bool standardize = false;
    double lambda = 0.0;
    double noise_variance = 1.0;
};

struct Prepared {
    LabeledDataset train;
    std::optional<LabeledDataset> test;
};

std::optional<std::string> opt(const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void add_regression_options(CLI::App* app, RegressionInputs& in, bool with_lambda) {
    app->add_option("--train", in.train, "training CSV with a header row")->required();
    app->add_option("--test", in.test, "test CSV with the same columns");
    app->add_option("--target", in.target, "target column name (default: last column)");
    app->add_option("--test-fraction", in.test_fraction, "hold out this fraction of --train (seeded shuffle)");
    app->add_option("--split-column", in.split_column, "column used for a threshold split of --train");
    app->add_option("--split-threshold", in.split_threshold, "rows with value <= threshold train, the rest test");
    app->add_option("--feature-map", in.feature_map, "identity | polynomial | cosine (maps a single input column)");
    app->add_option("--degree", in.degree, "feature-map degree (columns 0..degree)");
    app->add_flag("--standardize", in.standardize, "zero-mean unit-variance features, fit on train only");
    if (with_lambda) app->add_option("--lambda", in.lambda, "ridge regularization (>= 0)");
    app->add_option("--noise-variance", in.noise_variance, "noise variance sigma^2 (> 0)");
}

json regression_config(const RegressionInputs& in) {
    json c;
    c["train"] = in.train;
    c["test"] = in.test;
    c["target"] = in.target;
    c["test_fraction"] = in.test_fraction;
    c["split_column"] = in.split_column;
    c["split_threshold"] = in.split_threshold ? json(*in.split_threshold) : json(nullptr);
    c["feature_map"] = in.feature_map;
    c["degree"] = in.degree;
    c["standardize"] = in.standardize;
    c["lambda"] = in.lambda;
    c["noise_variance"] = in.noise_variance;
    return c;
}

Matrix map_features(const Matrix& x, data::FeatureKind kind, int degree) {
    if (kind == data::FeatureKind::Identity) return x;
    if (x.cols() != 1) {
        throw InputError("--feature-map needs exactly one input column, found " + std::to_string(x.cols()));
    }
    return data::feature_map(x.col(0), kind, degree);
}

Prepared prepare(const RegressionInputs& in, std::uint64_t seed, bool need_test) {
    if (in.degree < 0) throw InputError("--degree must be >= 0");
    if (!(in.noise_variance > 0.0)) throw InputError("--noise-variance must be > 0");
    if (!(in.lambda >= 0.0)) throw InputError("--lambda must be >= 0");
    if (in.split_column.empty() != !in.split_threshold) {
        throw InputError("--split-column and --split-threshold must be given together");
    }
    const int sources = !in.test.empty() + (in.test_fraction > 0.0) + !in.split_column.empty();
    if (sources > 1) throw InputError("use only one of --test, --test-fraction, --split-column");
    const auto kind = data::parse_feature_kind(in.feature_map);
    const auto target = opt(in.target);

    Prepared p;
    const data::Table table = data::read_csv(in.train);
    if (!in.split_column.empty()) {
        auto [lo, hi] = data::threshold_split(table, in.split_column, *in.split_threshold);
        p.train = data::to_dataset(lo, target);
        p.test = data::to_dataset(hi, target);
    } else if (in.test_fraction > 0.0) {
        auto split = data::random_split(data::to_dataset(table, target), in.test_fraction, seed);
        p.train = std::move(split.train);
        p.test = std::move(split.test);
    } else {
        p.train = data::to_dataset(table, target);
        if (!in.test.empty()) {
            const data::Table t = data::read_csv(in.test);
            if (t.columns != table.columns) throw InputError("--test columns differ from --train columns");
            p.test = data::to_dataset(t, target);
        }
    }
    if (need_test && !p.test) throw InputError("a test set is required: pass --test, --test-fraction or --split-column");

    p.train.features = map_features(p.train.features, kind, in.degree);
    if (p.test) p.test->features = map_features(p.test->features, kind, in.degree);
    if (in.standardize) {
        const auto s = data::Standardizer::fit(p.train.features);
        p.train.features = s.apply(p.train.features);
        if (p.test) p.test->features = s.apply(p.test->features);
    }
    return p;
}

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
        if (r.ec != std::errc() || r.ptr != item.data() + item.size()) {
            throw InputError(flag + ": cannot parse '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw InputError(flag + " is empty");
    return out;
}

std::vector<int> read_labels(const std::string& path) {
    const data::Table t = data::read_csv(path);
    std::vector<int> labels;
    for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
        const double v = t.values(r, 0);
        if (v < 0 || v != std::floor(v)) {
            throw InputError(path + ": line " + std::to_string(r + 2) + ": label must be a nonnegative integer");
        }
        labels.push_back(static_cast<int>(v));
    }
    return labels;
}

// CSV view of results["rows"]: one column per key of the first row; arrays are
// joined with ';'.
std::string to_csv(const json& results) {
    if (!results.contains("rows") || !results["rows"].is_array() || results["rows"].empty()) {
        throw InputError("--format csv is only available for tabular results");
    }
    const json& rows = results["rows"];
    std::vector<std::string> keys;
    for (auto it = rows[0].begin(); it != rows[0].end(); ++it) keys.push_back(it.key());
    auto cell = [](const json& v) {
        if (v.is_array()) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + v[i].dump();
            return s;
        }
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    std::ostringstream out;
    for (std::size_t k = 0; k < keys.size(); ++k) out << (k ? "," : "") << keys[k];
    out << '\n';
    for (const json& row : rows) {
        for (std::size_t k = 0; k < keys.size(); ++k) out << (k ? "," : "") << cell(row.value(keys[k], json()));
        out << '\n';
    }
    return out.str();
}

void emit(const Common& common, const std::string& command, json config, json results) {
    if (common.format != "json" && common.format != "csv") throw InputError("--format must be json or csv");
    config["subcommand"] = command;
    config["seed"] = common.seed;
    std::string text;
    if (common.format == "csv") {
        text = to_csv(results);
    } else {
        json doc;
        doc["config"] = std::move(config);
        doc["results"] = std::move(results);
        doc["version"] = PNML_VERSION;
        text = doc.dump(2) + "\n";
    }
    if (common.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(common.output);
        if (!out) throw InputError("cannot write " + common.output);
        out << text;
    }
}

int fail(int code, const std::string& kind, const std::string& message) {
    json err;
    err["error"] = kind;
    err["message"] = message;
    std::cerr << err.dump() << std::endl;
    return code;
}

json gaussian_row(const GaussianPredictive& q, const std::optional<double>& y) {
    json r;
    r["mean"] = q.mean;
    r["variance"] = q.variance;
    r["regret"] = q.regret;
    r["log_loss"] = y ? json(-q.log_density(*y)) : json(nullptr);
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pNML universal learning toolkit"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "random seed");
        sub->add_option("-o,--output", common.output, "output path (default stdout)");
        sub->add_option("--format", common.format, "json | csv");
    };
    RegressionInputs reg;

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "ridge / least-squares fit and its spectrum");
    add_regression_options(fit_cmd, reg, true);
    add_common(fit_cmd);

    // pnml-regret
    auto* pnml_cmd = app.add_subcommand("pnml-regret", "closed-form pNML predictive and regret per test row");
    add_regression_options(pnml_cmd, reg, true);
    add_common(pnml_cmd);

    // overparam-regret
    auto* over_cmd = app.add_subcommand("overparam-regret", "norm-constrained pNML: empirical regret and bound");
    add_regression_options(over_cmd, reg, false);
    add_common(over_cmd);

    // lpnml
    auto* lp_cmd = app.add_subcommand("lpnml", "pNML with Gaussian luckiness vs ridge and Bayesian predictives");
    add_regression_options(lp_cmd, reg, true);
    add_common(lp_cmd);

    // loo-tune
    std::string learner = "lpnml";
    double lambda_min = 1e-6, lambda_max = 1e3, sigma_min = 1e-3, sigma_max = 1e2;
    int lambda_count = 40, sigma_count = 20;
    auto* loo_cmd = app.add_subcommand("loo-tune", "leave-one-out selection of lambda and sigma^2");
    add_regression_options(loo_cmd, reg, false);
    loo_cmd->add_option("--learner", learner, "ridge | bayesian | lpnml");
    loo_cmd->add_option("--lambda-min", lambda_min);
    loo_cmd->add_option("--lambda-max", lambda_max);
    loo_cmd->add_option("--lambda-count", lambda_count);
    loo_cmd->add_option("--sigma-min", sigma_min);
    loo_cmd->add_option("--sigma-max", sigma_max);
    loo_cmd->add_option("--sigma-count", sigma_count);
    add_common(loo_cmd);

    // spectrum
    auto* spec_cmd = app.add_subcommand("spectrum", "per-direction regret contributions for each test row");
    add_regression_options(spec_cmd, reg, true);
    add_common(spec_cmd);

    // ood-score / trained-pnml
    std::string emb_train, emb_labels, emb_test;
    bool normalize = true;
    int epochs = 500;
    double lr = 0.1;
    int ft_epochs = 10;
    double ft_lr = 1e-3;
    auto add_embedding_options = [&](CLI::App* sub) {
        sub->add_option("--train", emb_train, "training embeddings (PNML binary or CSV)")->required();
        sub->add_option("--labels", emb_labels, "CSV whose first column holds the training labels")->required();
        sub->add_option("--test", emb_test, "test embeddings (PNML binary or CSV)")->required();
        sub->add_flag("--normalize-embeddings,!--no-normalize-embeddings", normalize, "L2-normalize embeddings");
        sub->add_option("--epochs", epochs, "ERM training epochs");
        sub->add_option("--lr", lr, "ERM learning rate");
        add_common(sub);
    };
    auto* ood_cmd = app.add_subcommand("ood-score", "analytic softmax pNML regret as an OOD score");
    add_embedding_options(ood_cmd);
    auto* tp_cmd = app.add_subcommand("trained-pnml", "pNML by per-label fine-tuning of the last layer");
    add_embedding_options(tp_cmd);
    tp_cmd->add_option("--ft-epochs", ft_epochs, "fine-tuning epochs per label");
    tp_cmd->add_option("--ft-lr", ft_lr, "fine-tuning learning rate");

    // adv-toy
    adversarial::ToyBenchmarkConfig adv;
    auto* adv_cmd = app.add_subcommand("adv-toy", "adversarial refinement defense on the 2D ring benchmark");
    adv_cmd->add_option("--points-per-class", adv.points_per_class);
    adv_cmd->add_option("--test-points-per-class", adv.test_points_per_class);
    adv_cmd->add_option("--hidden-width", adv.hidden_width);
    adv_cmd->add_option("--hidden-layers", adv.hidden_layers);
    adv_cmd->add_option("--epochs", adv.training.epochs);
    adv_cmd->add_option("--lr", adv.training.learning_rate);
    adv_cmd->add_option("--train-epsilon", adv.train_epsilon);
    adv_cmd->add_option("--train-step", adv.train_step);
    adv_cmd->add_option("--train-iterations", adv.train_iterations);
    adv_cmd->add_option("--test-epsilon", adv.test_epsilon);
    adv_cmd->add_option("--test-step", adv.test_step);
    adv_cmd->add_option("--test-iterations", adv.test_iterations);
    adv_cmd->add_option("--restarts", adv.restarts);
    adv_cmd->add_option("--refine-strength", adv.refinement.strength);
    add_common(adv_cmd);

    // dial
    std::string al_labeled, al_pool, al_test, strategy = "both";
    dial::LoopOptions loop;
    dial::PoolOptions pool_opts;
    int members = 20;
    auto* dial_cmd = app.add_subcommand("dial", "active learning curve (DIAL and/or random selection)");
    dial_cmd->add_option("--labeled", al_labeled, "initial labeled CSV (features..., label)");
    dial_cmd->add_option("--pool", al_pool, "pool CSV (features..., label; -1 marks OOD)");
    dial_cmd->add_option("--testset", al_test, "test CSV (features..., label)");
    dial_cmd->add_option("--strategy", strategy, "dial | random | both");
    dial_cmd->add_option("--budget", loop.budget);
    dial_cmd->add_option("--candidates", loop.candidate_subsample, "candidate subsample per step");
    dial_cmd->add_option("--test-subsample", loop.test_subsample, "test subsample per step");
    dial_cmd->add_option("--members", members, "bootstrap ensemble size");
    dial_cmd->add_option("--pool-ind", pool_opts.pool_in_distribution, "synthetic pool: in-distribution points");
    dial_cmd->add_option("--pool-ood", pool_opts.pool_out_of_distribution, "synthetic pool: OOD points");
    add_common(dial_cmd);

    // double-descent
    std::string dd_data, model_sizes = "5,10,20,40,80", dd_map = "cosine";
    int train_size = 20, test_size = 100;
    double noise_sd = 0.1, dd_variance = 0.01, dd_fraction = 0.5;
    auto* dd_cmd = app.add_subcommand("double-descent", "regret and log-loss across model sizes");
    dd_cmd->add_option("--data", dd_data, "CSV with one input column t and a target (default: synthetic)");
    dd_cmd->add_option("--test-fraction", dd_fraction, "held-out fraction for --data");
    dd_cmd->add_option("--model-sizes", model_sizes, "comma-separated feature counts");
    dd_cmd->add_option("--feature-map", dd_map, "polynomial | cosine");
    dd_cmd->add_option("--train-size", train_size, "synthetic training points");
    dd_cmd->add_option("--test-size", test_size, "synthetic test points");
    dd_cmd->add_option("--noise-sd", noise_sd, "synthetic label noise");
    dd_cmd->add_option("--noise-variance", dd_variance, "learner sigma^2");
    add_common(dd_cmd);

    // regret-threshold
    std::string rt_input, thresholds;
    auto* rt_cmd = app.add_subcommand("regret-threshold", "mean loss of samples below each regret threshold");
    rt_cmd->add_option("--input", rt_input, "CSV with columns regret and loss")->required();
    rt_cmd->add_option("--thresholds", thresholds, "comma-separated thresholds")->required();
    add_common(rt_cmd);

    // metrics
    std::string m_input;
    double tpr = 0.95;
    auto* met_cmd = app.add_subcommand("metrics", "AUROC, TNR at TPR, detection accuracy and OSCR");
    met_cmd->add_option("--input", m_input,
                        "CSV with columns score and ood (1 = OOD); higher score means in-distribution; "
                        "an optional correct column enables OSCR")
        ->required();
    met_cmd->add_option("--tpr", tpr, "TPR level for TNR");
    add_common(met_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitConfig, "config", e.what());
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "fit") {
            const Prepared p = prepare(reg, common.seed, false);
            const auto fit = regression::RegressionFit::fit(p.train, reg.lambda, reg.noise_variance);
            json r;
            r["weights"] = vec(fit.weights());
            r["rank"] = fit.spectrum().rank;
            r["singular_values"] = vec(fit.spectrum().singular_values);
            r["train_size"] = p.train.size();
            emit(common, name, regression_config(reg), r);
        } else if (name == "pnml-regret") {
            const Prepared p = prepare(reg, common.seed, true);
            const auto fit = regression::RegressionFit::fit(p.train, reg.lambda, reg.noise_variance);
            json rows = json::array();
            for (Eigen::Index i = 0; i < p.test->size(); ++i) {
                rows.push_back(gaussian_row(regression::pnml_predict(fit, p.test->features.row(i).transpose()),
                                            p.test->targets(i)));
            }
            emit(common, name, regression_config(reg), json{{"rows", rows}});
        } else if (name == "overparam-regret") {
            const Prepared p = prepare(reg, common.seed, true);
            const auto fit = overparam::MinNormFit::fit(p.train, reg.noise_variance);
            json rows = json::array();
            for (Eigen::Index i = 0; i < p.test->size(); ++i) {
                const Vector x = p.test->features.row(i).transpose();
                const auto emp = overparam::empirical_regret(fit, x);
                json r;
                r["mn_prediction"] = fit.predict(x);
                r["regret"] = emp.regret;
                r["bound"] = overparam::regret_upper_bound(fit, x);
                r["in_span"] = emp.in_span;
                r["orthogonal_norm"] = fit.orthogonal_residual(x).norm();
                rows.push_back(r);
            }
            json results{{"rows", rows}, {"mn_squared_norm", fit.squared_norm()}};
            emit(common, name, regression_config(reg), results);
        } else if (name == "lpnml") {
            const Prepared p = prepare(reg, common.seed, true);
            const auto fit = regression::RegressionFit::fit(p.train, reg.lambda, reg.noise_variance);
            json rows = json::array();
            for (Eigen::Index i = 0; i < p.test->size(); ++i) {
                const Vector x = p.test->features.row(i).transpose();
                const double y = p.test->targets(i);
                const auto q = luckiness::lpnml_predict(fit, x);
                json r;
                r["ridge_mean"] = q.ridge_mean;
                r["shift"] = q.shift;
                r["mean"] = q.mean();
                r["variance"] = q.variance;
                r["log_constant"] = q.log_constant;
                r["regret"] = q.regret;
                r["lpnml_log_loss"] = luckiness::log_loss(fit, x, y, luckiness::LearnerKind::Lpnml);
                r["ridge_log_loss"] = luckiness::log_loss(fit, x, y, luckiness::LearnerKind::Ridge);
                r["bayesian_log_loss"] = luckiness::log_loss(fit, x, y, luckiness::LearnerKind::Bayesian);
                r["squared_error_ridge"] = (q.ridge_mean - y) * (q.ridge_mean - y);
                r["squared_error_lpnml"] = (q.mean() - y) * (q.mean() - y);
                rows.push_back(r);
            }
            emit(common, name, regression_config(reg), json{{"rows", rows}});
        } else if (name == "loo-tune") {
            const Prepared p = prepare(reg, common.seed, false);
            luckiness::LearnerKind kind;
            if (learner == "ridge") kind = luckiness::LearnerKind::Ridge;
            else if (learner == "bayesian") kind = luckiness::LearnerKind::Bayesian;
            else if (learner == "lpnml") kind = luckiness::LearnerKind::Lpnml;
            else throw InputError("--learner must be ridge, bayesian or lpnml");
            luckiness::TuningGrid grid{luckiness::log_space(lambda_min, lambda_max, lambda_count),
                                       luckiness::log_space(sigma_min, sigma_max, sigma_count)};
            const auto t = luckiness::loo_tune(p.train, grid, kind);
            json config = regression_config(reg);
            config["learner"] = learner;
            config["lambda_grid"] = grid.lambdas;
            config["sigma_grid"] = grid.noise_variances;
            emit(common, name, config,
                 json{{"lambda", t.lambda},
                      {"noise_variance", t.noise_variance},
                      {"pooled_lambda", t.pooled_lambda},
                      {"pooled_noise_variance", t.pooled_noise_variance},
                      {"fold_lambdas", t.fold_lambdas},
                      {"fold_noise_variances", t.fold_noise_variances}});
        } else if (name == "spectrum") {
            const Prepared p = prepare(reg, common.seed, true);
            const auto fit = regression::RegressionFit::fit(p.train, reg.lambda, reg.noise_variance);
            json rows = json::array();
            for (Eigen::Index i = 0; i < p.test->size(); ++i) {
                const auto s = regression::regret_spectrum(fit, p.test->features.row(i).transpose());
                rows.push_back({{"terms", s.terms},
                                {"singular_values", s.singular_values},
                                {"normalization", s.normalization},
                                {"regret", s.regret}});
            }
            emit(common, name, regression_config(reg), json{{"rows", rows}});
        } else if (name == "ood-score" || name == "trained-pnml") {
            const Matrix train = data::read_embeddings(emb_train);
            const std::vector<int> labels = read_labels(emb_labels);
            const Matrix test = data::read_embeddings(emb_test);
            if (static_cast<Eigen::Index>(labels.size()) != train.rows()) {
                throw InputError("--labels has " + std::to_string(labels.size()) + " rows, --train has " +
                                 std::to_string(train.rows()));
            }
            if (test.cols() != train.cols()) throw InputError("--test dimension differs from --train");
            const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
            const softmax::EmbeddingSet set(train, normalize);
            const auto head = softmax::fit_erm(set, labels, std::max(classes, 2), {lr, epochs, 0});
            json rows = json::array();
            for (Eigen::Index i = 0; i < test.rows(); ++i) {
                const Vector x = test.row(i).transpose();
                if (name == "ood-score") {
                    const auto s = softmax::ood_score(set, head, x);
                    rows.push_back({{"regret", s.regret},
                                    {"xg", s.xg},
                                    {"erm_max_probability", s.erm_probabilities.maxCoeff()},
                                    {"probabilities", vec(s.pnml.probabilities)},
                                    {"prediction", s.pnml.argmax()}});
                } else {
                    const auto q = softmax::trained_pnml(set, labels, head, x, {ft_lr, ft_epochs, 3});
                    rows.push_back(
                        {{"regret", q.regret}, {"probabilities", vec(q.probabilities)}, {"prediction", q.argmax()}});
                }
            }
            json config{{"train", emb_train},       {"labels", emb_labels}, {"test", emb_test},
                        {"normalize", normalize},   {"epochs", epochs},     {"lr", lr}};
            if (name == "trained-pnml") {
                config["ft_epochs"] = ft_epochs;
                config["ft_lr"] = ft_lr;
            }
            emit(common, name, config, json{{"rows", rows}});
        } else if (name == "adv-toy") {
            adv.seed = common.seed;
            adv.training.seed = common.seed;
            const auto r = adversarial::run_toy_benchmark(adv);
            json config{{"points_per_class", adv.points_per_class},
                        {"test_points_per_class", adv.test_points_per_class},
                        {"hidden_width", adv.hidden_width},
                        {"hidden_layers", adv.hidden_layers},
                        {"epochs", adv.training.epochs},
                        {"lr", adv.training.learning_rate},
                        {"train_epsilon", adv.train_epsilon},
                        {"train_step", adv.train_step},
                        {"train_iterations", adv.train_iterations},
                        {"test_epsilon", adv.test_epsilon},
                        {"test_step", adv.test_step},
                        {"test_iterations", adv.test_iterations},
                        {"restarts", adv.restarts},
                        {"refine_strength", adv.refinement.strength}};
            emit(common, name, config,
                 json{{"clean_accuracy", r.clean_acc},
                      {"clean_accuracy_defense", r.clean_acc_defense},
                      {"pgd_accuracy_base", r.pgd_acc_base},
                      {"pgd_accuracy_defense", r.pgd_acc_defense},
                      {"adaptive_accuracy_defense", r.adaptive_acc_defense}});
        } else if (name == "dial") {
            if (strategy != "dial" && strategy != "random" && strategy != "both") {
                throw InputError("--strategy must be dial, random or both");
            }
            if (loop.candidate_subsample < 1 || loop.test_subsample < 1) {
                throw InputError("--candidates and --test-subsample must be >= 1");
            }
            dial::ActiveLearningProblem problem;
            const int files = !al_labeled.empty() + !al_pool.empty() + !al_test.empty();
            if (files == 3) {
                problem.labeled = data::to_classification(data::read_csv(al_labeled));
                const data::Table pool = data::read_csv(al_pool);
                problem.pool = pool.values.leftCols(pool.values.cols() - 1);
                for (Eigen::Index r = 0; r < pool.values.rows(); ++r) {
                    const double v = pool.values(r, pool.values.cols() - 1);
                    if (v != std::floor(v) || v < -1) throw InputError("pool labels must be integers >= -1");
                    problem.pool_labels.push_back(static_cast<int>(v));
                }
                problem.testset = data::to_classification(data::read_csv(al_test));
                const int classes = std::max(problem.labeled.num_classes, problem.testset.num_classes);
                problem.labeled.num_classes = problem.testset.num_classes = std::max(classes, 2);
            } else if (files == 0) {
                std::mt19937_64 rng(common.seed);
                problem = dial::make_two_gaussian_problem(pool_opts, rng);
            } else {
                throw InputError("pass all of --labeled, --pool, --testset or none (synthetic pool)");
            }
            loop.seed = common.seed;
            const auto builder = dial::bootstrap_softmax_builder(members);
            json results;
            for (const std::string s : {"dial", "random"}) {
                if (strategy != "both" && strategy != s) continue;
                loop.strategy = s == "dial" ? dial::Strategy::Dial : dial::Strategy::Random;
                json curve = json::array();
                for (const auto& pt : dial::acquisition_loop(problem, builder, loop)) {
                    curve.push_back({{"n_labeled", pt.n_labeled},
                                     {"n_queried", pt.n_queried},
                                     {"accuracy", pt.accuracy},
                                     {"ood_fraction", pt.ood_fraction}});
                }
                results[s] = curve;
            }
            if (strategy != "both") results["rows"] = results[strategy];
            json config{{"labeled", al_labeled},     {"pool", al_pool},
                        {"testset", al_test},        {"strategy", strategy},
                        {"budget", loop.budget},     {"candidates", loop.candidate_subsample},
                        {"test_subsample", loop.test_subsample}, {"members", members}};
            emit(common, name, config, results);
        } else if (name == "double-descent") {
            const auto kind = data::parse_feature_kind(dd_map);
            std::vector<int> sizes;
            for (double v : parse_list(model_sizes, "--model-sizes")) {
                if (v < 1 || v != std::floor(v)) throw InputError("--model-sizes must be positive integers");
                sizes.push_back(static_cast<int>(v));
            }
            experiments::CurveProblem problem;
            if (!dd_data.empty()) {
                const auto d = data::load_csv(dd_data);
                if (d.dimension() != 1) throw InputError("--data needs exactly one input column and a target");
                const auto split = data::random_split(d, dd_fraction, common.seed);
                problem = {split.train.features.col(0), split.train.targets, split.test.features.col(0),
                           split.test.targets};
            } else {
                std::mt19937_64 rng(common.seed);
                problem = experiments::make_cosine_problem(train_size, test_size, noise_sd, rng);
            }
            json rows = json::array();
            for (const auto& r : experiments::double_descent(problem, sizes, dd_variance, kind)) {
                rows.push_back({{"model_size", r.model_size},
                                {"ratio", r.ratio},
                                {"mean_log_loss", r.mean_log_loss},
                                {"mean_regret", r.mean_regret},
                                {"mean_bound", r.mean_bound}});
            }
            json config{{"data", dd_data},          {"test_fraction", dd_fraction}, {"model_sizes", sizes},
                        {"feature_map", dd_map},     {"train_size", train_size},     {"test_size", test_size},
                        {"noise_sd", noise_sd},      {"noise_variance", dd_variance}};
            emit(common, name, config, json{{"rows", rows}});
        } else if (name == "regret-threshold") {
            const data::Table t = data::read_csv(rt_input);
            const Eigen::Index rc = t.column_index("regret");
            const Eigen::Index lc = t.column_index("loss");
            std::vector<double> regrets, losses;
            for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
                regrets.push_back(t.values(r, rc));
                losses.push_back(t.values(r, lc));
            }
            json rows = json::array();
            for (const auto& r : experiments::regret_threshold_eval(regrets, losses, parse_list(thresholds, "--thresholds"))) {
                rows.push_back({{"threshold", r.threshold},
                                {"retained", r.retained},
                                {"retained_fraction", r.retained_fraction},
                                {"mean_loss", r.empty ? json(nullptr) : json(r.mean_loss)},
                                {"empty", r.empty}});
            }
            emit(common, name, json{{"input", rt_input}, {"thresholds", thresholds}}, json{{"rows", rows}});
        } else if (name == "metrics") {
            const data::Table t = data::read_csv(m_input);
            const Eigen::Index sc = t.column_index("score");
            const Eigen::Index oc = t.column_index("ood");
            const auto has_correct = std::find(t.columns.begin(), t.columns.end(), "correct") != t.columns.end();
            std::vector<double> ind, ood;
            std::vector<metrics::ScoredSample> closed, open;
            for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
                const double s = t.values(r, sc);
                const bool is_ood = t.values(r, oc) != 0.0;
                (is_ood ? ood : ind).push_back(s);
                metrics::ScoredSample sample{s, is_ood ? -1 : 0,
                                             has_correct && t.values(r, t.column_index("correct")) != 0.0};
                (is_ood ? open : closed).push_back(sample);
            }
            json results{{"auroc", metrics::auroc(ind, ood)},
                         {"tnr_at_tpr", metrics::tnr_at_tpr(ind, ood, tpr)},
                         {"detection_accuracy", metrics::detection_accuracy(ind, ood)}};
            if (has_correct) {
                const auto curve = metrics::oscr_curve(closed, open);
                json pts = json::array();
                for (const auto& pt : curve.points) {
                    pts.push_back({{"threshold", std::isfinite(pt.threshold) ? json(pt.threshold) : json("inf")},
                                   {"fpr", pt.fpr},
                                   {"ccr", pt.ccr}});
                }
                results["oscr_auc"] = curve.auc;
                results["oscr"] = pts;
            }
            emit(common, name, json{{"input", m_input}, {"tpr", tpr}}, results);
        }
    } catch (const InputError& e) {
        return fail(kExitConfig, "config", e.what());
    } catch (const NumericalError& e) {
        return fail(kExitNumerical, "numerical", e.what());
    } catch (const std::exception& e) {
        return fail(kExitNumerical, "numerical", e.what());
    }
    return 0;
}
