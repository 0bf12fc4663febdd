#include "pnml/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "pnml/error.hpp"

namespace pnml::adversarial {

namespace {

void check_batch(const Matrix& x, const std::vector<int>& labels, int input_dim, int classes) {
    if (x.cols() != input_dim) {
        throw InputError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(input_dim));
    }
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw InputError("label count does not match batch size");
    for (int y : labels) {
        if (y < 0 || y >= classes) throw InputError("label " + std::to_string(y) + " out of range");
    }
}

Matrix row_softmax(Matrix logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        logits.row(i) = (logits.row(i).array() - m).exp();
        logits.row(i) /= logits.row(i).sum();
    }
    return logits;
}

Vector row_cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    Vector out(logits.rows());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        out(i) = m + std::log((logits.row(i).array() - m).exp().sum()) - logits(i, labels[i]);
    }
    return out;
}

void project(Matrix& adv, const Matrix& x, double epsilon,
             const std::optional<std::pair<double, double>>& clip) {
    adv = adv.array().max(x.array() - epsilon).min(x.array() + epsilon).matrix();
    if (clip) adv = adv.array().max(clip->first).min(clip->second).matrix();
}

}  // namespace

ToyMlp::ToyMlp(std::vector<int> widths, std::uint64_t seed) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw InputError("MLP needs at least an input and an output width");
    for (int w : widths_) {
        if (w < 1) throw InputError("MLP layer widths must be positive");
    }
    if (widths_.back() < 2) throw InputError("MLP needs at least 2 output classes");
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const int in = widths_[l];
        const int out = widths_[l + 1];
        const double bound = std::sqrt(6.0 / in);
        std::uniform_real_distribution<double> dist(-bound, bound);
        Matrix w(out, in);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
        weights_.push_back(std::move(w));
        biases_.push_back(Vector::Zero(out));
    }
}

Matrix ToyMlp::logits(const Matrix& x) const {
    if (x.cols() != input_dimension()) throw InputError("input dimension does not match the model");
    Matrix h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Matrix z = h * weights_[l].transpose();
        z.rowwise() += biases_[l].transpose();
        if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

Matrix ToyMlp::probabilities(const Matrix& x) const { return row_softmax(logits(x)); }

Vector ToyMlp::probabilities(const Vector& x) const {
    return probabilities(Matrix(x.transpose())).row(0).transpose();
}

std::vector<int> ToyMlp::predict(const Matrix& x) const {
    const Matrix z = logits(x);
    std::vector<int> out(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        Eigen::Index best = 0;
        z.row(i).maxCoeff(&best);
        out[i] = static_cast<int>(best);
    }
    return out;
}

Vector ToyMlp::losses(const Matrix& x, const std::vector<int>& labels) const {
    check_batch(x, labels, input_dimension(), num_classes());
    return row_cross_entropy(logits(x), labels);
}

ToyMlp::Gradients ToyMlp::backward(const Matrix& x, const std::vector<int>& labels) const {
    return backprop(x, labels, true);
}

std::pair<Vector, Matrix> ToyMlp::input_gradient(const Matrix& x, const std::vector<int>& labels) const {
    Gradients g = backprop(x, labels, false);
    return {std::move(g.losses), std::move(g.input)};
}

ToyMlp::Gradients ToyMlp::backprop(const Matrix& x, const std::vector<int>& labels, bool with_weights) const {
    check_batch(x, labels, input_dimension(), num_classes());
    const std::size_t layers = weights_.size();
    std::vector<Matrix> pre(layers);
    std::vector<Matrix> post(layers + 1);
    post[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = post[l] * weights_[l].transpose();
        pre[l].rowwise() += biases_[l].transpose();
        post[l + 1] = l + 1 < layers ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
    }

    Gradients g;
    g.losses = row_cross_entropy(pre[layers - 1], labels);
    Matrix delta = row_softmax(pre[layers - 1]);
    for (Eigen::Index i = 0; i < delta.rows(); ++i) delta(i, labels[i]) -= 1.0;

    if (with_weights) {
        g.weights.resize(layers);
        g.biases.resize(layers);
    }
    for (std::size_t l = layers; l-- > 0;) {
        if (with_weights) {
            g.weights[l] = delta.transpose() * post[l];
            g.biases[l] = delta.colwise().sum().transpose();
        }
        Matrix up = delta * weights_[l];
        if (l > 0) {
            delta = (pre[l - 1].array() > 0.0).select(up, 0.0);
        } else {
            g.input = std::move(up);
        }
    }
    return g;
}

Eigen::Index ToyMlp::parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

Vector ToyMlp::flatten(const std::vector<Matrix>& weights, const std::vector<Vector>& biases) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    Vector out(n);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.segment(k, weights[l].size()) = Eigen::Map<const Vector>(weights[l].data(), weights[l].size());
        k += weights[l].size();
        out.segment(k, biases[l].size()) = biases[l];
        k += biases[l].size();
    }
    return out;
}

Vector ToyMlp::parameters() const { return flatten(weights_, biases_); }

void ToyMlp::set_parameters(const Vector& flat) {
    if (flat.size() != parameter_count()) throw InputError("parameter vector has the wrong length");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::Map<Vector>(weights_[l].data(), weights_[l].size()) = flat.segment(k, weights_[l].size());
        k += weights_[l].size();
        biases_[l] = flat.segment(k, biases_[l].size());
        k += biases_[l].size();
    }
}

Matrix signed_step(const Matrix& g) {
    return g.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

LossGradient cross_entropy_objective(const ToyMlp& model) {
    return [&model](const Matrix& x, const std::vector<int>& labels) {
        return model.input_gradient(x, labels);
    };
}

Matrix fgsm(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels, double epsilon,
            bool targeted) {
    if (!(epsilon >= 0.0)) throw InputError("epsilon must be >= 0");
    const Matrix step = signed_step(model.input_gradient(x, labels).second);
    return targeted ? Matrix(x - epsilon * step) : Matrix(x + epsilon * step);
}

Matrix pgd(const LossGradient& objective, const Matrix& x, const std::vector<int>& labels,
           const AttackConfig& config) {
    if (!(config.epsilon > 0.0) || !(config.step > 0.0)) throw InputError("PGD needs epsilon > 0 and step > 0");
    if (config.iterations < 1 || config.restarts < 1) throw InputError("PGD needs iterations >= 1 and restarts >= 1");
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw InputError("label count does not match batch size");

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> noise(-config.epsilon, config.epsilon);
    const double direction = config.targeted ? -1.0 : 1.0;

    Matrix best = x;
    Vector best_loss = Vector::Constant(x.rows(), -std::numeric_limits<double>::infinity());
    for (int r = 0; r < config.restarts; ++r) {
        Matrix adv = x;
        if (config.random_start) {
            for (Eigen::Index i = 0; i < adv.size(); ++i) adv.data()[i] += noise(rng);
            project(adv, x, config.epsilon, config.clip);
        }
        for (int t = 0; t < config.iterations; ++t) {
            const Matrix grad = objective(adv, labels).second;
            adv += direction * config.step * signed_step(grad);
            project(adv, x, config.epsilon, config.clip);
        }
        // A single restart has nothing to compare against.
        if (config.restarts == 1) return adv;
        const Vector loss = objective(adv, labels).first * direction;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (loss(i) > best_loss(i)) {
                best_loss(i) = loss(i);
                best.row(i) = adv.row(i);
            }
        }
    }
    return best;
}

Matrix pgd(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels,
           const AttackConfig& config) {
    return pgd(cross_entropy_objective(model), x, labels, config);
}

Matrix refine(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels,
              const RefineConfig& config) {
    if (!(config.strength >= 0.0)) throw InputError("refinement strength must be >= 0");
    if (config.steps < 1) throw InputError("refinement needs at least one step");
    if (config.strength == 0.0) return x;
    const double step = config.strength / config.steps;
    Matrix out = x;
    for (int s = 0; s < config.steps; ++s) out -= step * signed_step(model.input_gradient(out, labels).second);
    return out;
}

DefenseOutput adversarial_pnml_predict(const ToyMlp& model, const Matrix& x, const RefineConfig& config) {
    const int c = model.num_classes();
    if (config.strength == 0.0) {
        // Refinement is the identity, so K = Σ p = 1 and q is the base model.
        DefenseOutput out{model.probabilities(x), Vector::Zero(x.rows()), model.predict(x)};
        return out;
    }
    Matrix genie(x.rows(), c);
    for (int y = 0; y < c; ++y) {
        const std::vector<int> labels(x.rows(), y);
        genie.col(y) = model.probabilities(refine(model, x, labels, config)).col(y);
    }
    DefenseOutput out;
    out.probabilities.resize(x.rows(), c);
    out.regrets.resize(x.rows());
    out.predictions.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double k = genie.row(i).sum();
        out.probabilities.row(i) = genie.row(i) / k;
        out.regrets(i) = std::log(k);
        Eigen::Index best = 0;
        genie.row(i).maxCoeff(&best);
        out.predictions[i] = static_cast<int>(best);
    }
    return out;
}

CategoricalPredictive adversarial_pnml_predict(const ToyMlp& model, const Vector& x,
                                               const RefineConfig& config) {
    const DefenseOutput d = adversarial_pnml_predict(model, Matrix(x.transpose()), config);
    return {d.probabilities.row(0).transpose(), d.regrets(0)};
}

LossGradient defense_objective(const ToyMlp& model, const RefineConfig& config) {
    return [&model, config](const Matrix& x, const std::vector<int>& labels) {
        const int c = model.num_classes();
        const Eigen::Index n = x.rows();
        Matrix genie(n, c);
        std::vector<Matrix> grads(c);
        for (int y = 0; y < c; ++y) {
            const std::vector<int> hyp(n, y);
            const Matrix refined = refine(model, x, hyp, config);
            auto [losses, input] = model.input_gradient(refined, hyp);
            genie.col(y) = (-losses.array()).exp().matrix();
            grads[y] = std::move(input);
        }
        Vector loss(n);
        Matrix grad = Matrix::Zero(n, x.cols());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double k = genie.row(i).sum();
            loss(i) = std::log(k) - std::log(genie(i, labels[i]));
            grad.row(i) = grads[labels[i]].row(i);
            for (int y = 0; y < c; ++y) grad.row(i) -= (genie(i, y) / k) * grads[y].row(i);
        }
        return std::make_pair(std::move(loss), std::move(grad));
    };
}

Matrix adaptive_attack(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels,
                       const RefineConfig& refine_config, const AttackConfig& config) {
    return pgd(defense_objective(model, refine_config), x, labels, config);
}

ClassificationDataset make_ring_dataset(int points_per_class, std::mt19937_64& rng) {
    if (points_per_class < 1) throw InputError("points per class must be positive");
    std::normal_distribution<double> noise(0.0, 0.1);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    ClassificationDataset d;
    d.num_classes = 2;
    d.features.resize(2 * points_per_class, 2);
    d.labels.resize(2 * points_per_class);
    for (int i = 0; i < points_per_class; ++i) {
        d.features(i, 0) = noise(rng);
        d.features(i, 1) = noise(rng);
        d.labels[i] = 0;
    }
    for (int i = 0; i < points_per_class; ++i) {
        const double a = angle(rng);
        const Eigen::Index row = points_per_class + i;
        d.features(row, 0) = 2.0 * std::cos(a) + noise(rng);
        d.features(row, 1) = 2.0 * std::sin(a) + noise(rng);
        d.labels[row] = 1;
    }
    return d;
}

std::vector<double> train(ToyMlp& model, const ClassificationDataset& data, const TrainConfig& config) {
    check_batch(data.features, data.labels, model.input_dimension(), model.num_classes());
    if (config.epochs < 0 || !(config.learning_rate > 0.0)) throw InputError("invalid training configuration");
    const Eigen::Index n = data.size();
    const Eigen::Index batch = config.batch_size > 0 ? std::min<Eigen::Index>(config.batch_size, n) : n;

    std::mt19937_64 rng(config.seed);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);

    auto& weights = model.weight_matrices();
    auto& biases = model.bias_vectors();
    std::vector<Matrix> vw;
    std::vector<Vector> vb;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        vw.push_back(Matrix::Zero(weights[l].rows(), weights[l].cols()));
        vb.push_back(Vector::Zero(biases[l].size()));
    }

    std::vector<double> history;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Matrix inputs = data.features;
        if (config.adversary) {
            AttackConfig attack = *config.adversary;
            attack.seed = config.seed + 7919u * static_cast<std::uint64_t>(epoch + 1);
            inputs = pgd(model, data.features, data.labels, attack);
        }
        if (batch < n) std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index count = std::min(batch, n - start);
            Matrix xb(count, inputs.cols());
            std::vector<int> yb(count);
            for (Eigen::Index i = 0; i < count; ++i) {
                const Eigen::Index src = batch < n ? order[start + i] : start + i;
                xb.row(i) = inputs.row(src);
                yb[i] = data.labels[src];
            }
            const ToyMlp::Gradients g = model.backward(xb, yb);
            epoch_loss += g.losses.sum();
            const double scale = 1.0 / static_cast<double>(count);
            for (std::size_t l = 0; l < weights.size(); ++l) {
                vw[l] = config.momentum * vw[l] + scale * g.weights[l];
                vb[l] = config.momentum * vb[l] + scale * g.biases[l];
                weights[l] -= config.learning_rate * vw[l];
                biases[l] -= config.learning_rate * vb[l];
            }
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) throw NumericalError("MLP training produced a non-finite loss");
        history.push_back(epoch_loss);
    }
    return history;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
    if (predicted.size() != labels.size() || labels.empty()) throw InputError("accuracy needs equal, nonempty lists");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

ToyBenchmarkResult run_toy_benchmark(const ToyBenchmarkConfig& config) {
    std::mt19937_64 rng(config.seed);
    const ClassificationDataset train_set = make_ring_dataset(config.points_per_class, rng);
    const ClassificationDataset test_set = make_ring_dataset(config.test_points_per_class, rng);

    std::vector<int> widths{2};
    for (int l = 0; l < config.hidden_layers; ++l) widths.push_back(config.hidden_width);
    widths.push_back(2);
    ToyMlp model(widths, config.seed + 1);

    TrainConfig training = config.training;
    training.seed = config.seed + 2;
    AttackConfig train_attack;
    train_attack.epsilon = config.train_epsilon;
    train_attack.step = config.train_step;
    train_attack.iterations = config.train_iterations;
    train_attack.restarts = 1;
    training.adversary = train_attack;
    train(model, train_set, training);

    AttackConfig test_attack;
    test_attack.epsilon = config.test_epsilon;
    test_attack.step = config.test_step;
    test_attack.iterations = config.test_iterations;
    test_attack.restarts = config.restarts;
    test_attack.seed = config.seed + 3;

    ToyBenchmarkResult out;
    const auto& x = test_set.features;
    const auto& y = test_set.labels;
    out.clean_acc = accuracy(model.predict(x), y);
    out.clean_acc_defense = accuracy(adversarial_pnml_predict(model, x, config.refinement).predictions, y);

    const Matrix adv = pgd(model, x, y, test_attack);
    out.pgd_acc_base = accuracy(model.predict(adv), y);
    out.pgd_acc_defense = accuracy(adversarial_pnml_predict(model, adv, config.refinement).predictions, y);

    const Matrix adaptive = adaptive_attack(model, x, y, config.refinement, test_attack);
    out.adaptive_acc_defense = accuracy(adversarial_pnml_predict(model, adaptive, config.refinement).predictions, y);
    return out;
}

}  // namespace pnml::adversarial
