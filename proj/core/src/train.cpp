#include "bond/train.hpp"

#include "bond/errors.hpp"
#include "bond/optim.hpp"
#include "bond/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace bond {

namespace {

constexpr std::uint64_t kEstimatorTag = 0x3001;
constexpr std::uint64_t kOrderTagBase = 0x4000'0000;

Tensor2 take_rows(const Tensor2& source, const std::vector<std::size_t>& order,
                  std::size_t begin, std::size_t end) {
    Tensor2 out(end - begin, source.cols());
    for (std::size_t r = begin; r < end; ++r) {
        const double* src = source.row_ptr(order[r]);
        double* dst = out.row_ptr(r - begin);
        for (std::size_t c = 0; c < source.cols(); ++c) dst[c] = src[c];
    }
    return out;
}

struct LoopTimeAccumulator {
    std::vector<double> samples;

    void finish(std::size_t warmup, TrainResult& result) const {
        if (samples.size() <= warmup) return;
        const auto begin = samples.begin() + static_cast<std::ptrdiff_t>(warmup);
        const std::size_t n = static_cast<std::size_t>(samples.end() - begin);
        const double mean = std::accumulate(begin, samples.end(), 0.0) / static_cast<double>(n);
        double var = 0.0;
        for (auto it = begin; it != samples.end(); ++it) var += (*it - mean) * (*it - mean);
        result.loop_time_mean_ms = mean;
        result.loop_time_std_ms = std::sqrt(var / static_cast<double>(n));
    }
};

} // namespace

double evaluate_loss(const Architecture& arch, const LossFn& loss, const Tensor2& x,
                     const Tensor2& y) {
    Tensor2 h = arch.f_a.evaluate(x);
    if (arch.reservoir) h = arch.reservoir->evaluate(h);
    return loss.eval(arch.f_b.evaluate(h), y);
}

double evaluate_accuracy(const Architecture& arch, const Tensor2& x, const Tensor2& y) {
    Tensor2 h = arch.f_a.evaluate(x);
    if (arch.reservoir) h = arch.reservoir->evaluate(h);
    const Tensor2 logits = arch.f_b.evaluate(h);
    if (y.cols() != 1 || y.rows() != logits.rows()) {
        throw dimension_error("evaluate_accuracy: labels must be batch x 1");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c) {
            if (logits(i, c) > logits(i, best)) best = c;
        }
        if (best == static_cast<std::size_t>(y(i, 0))) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

TrainResult train(Architecture& arch, const Dataset& data, const RunConfig& config,
                  const IterationCallback& callback) {
    const LossFn loss = config.loss.make();
    const std::size_t n_train = data.x_train.rows();
    if (n_train == 0) throw parameter_error("train: empty train split");
    if (data.x_train.cols() != arch.input_dim()) {
        throw dimension_error("train: dataset feature width does not match read-in input");
    }

    const std::size_t d_r = arch.reservoir ? arch.reservoir->input_dim() : arch.f_a.output_dim();
    const bool runs_estimator =
        arch.f_a_trainable && arch.reservoir && config.estimator.kind != EstimatorKind::Ad;
    const bool compare_ad = config.compare_ad && runs_estimator;

    RollingMoments moments(d_r, config.estimator.beta1, config.estimator.beta2);
    Rng estimator_rng(derive_seed(config.seed, kEstimatorTag));
    EstimatorSettings settings;
    settings.perturb.delta_min = config.estimator.delta_min;
    settings.perturb.eta = config.optimizer.eta;
    settings.perturb.first_step_sigma = config.estimator.first_step_sigma;
    settings.row_norm = config.estimator.row_norm;
    settings.threads = config.threads;
    SpsaConfig spsa;
    spsa.mu0 = config.estimator.mu0;
    spsa.mu_decay = config.estimator.mu_decay;
    spsa.n_pert = config.estimator.n_pert;
    spsa.distribution = config.estimator.distribution;

    NetOptimizer opt_a(config.optimizer.kind, arch.f_a);
    NetOptimizer opt_b(config.optimizer.kind, arch.f_b);

    TrainResult result;
    result.trainable_parameters = arch.trainable_parameter_count();
    const std::uint64_t reservoir_hash0 = arch.reservoir ? arch.reservoir->param_hash() : 0;

    double test_loss = evaluate_loss(arch, loss, data.x_test, data.y_test);
    double initial_loss = 0.0;
    bool have_initial = false;
    double sign_sum = 0.0;
    std::size_t sign_count = 0;
    LoopTimeAccumulator loop_times;
    std::int64_t spsa_t = 0;
    std::size_t iteration = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (arch.reservoir) arch.reservoir->start_epoch();
        std::vector<std::size_t> order(n_train);
        std::iota(order.begin(), order.end(), 0);
        Rng order_rng(derive_seed(config.seed, kOrderTagBase + epoch));
        for (std::size_t i = n_train - 1; i > 0; --i) {
            std::swap(order[i], order[order_rng.below(i + 1)]);
        }

        const double eta =
            config.optimizer.eta * config.optimizer.schedule.multiplier(epoch, config.epochs);

        for (std::size_t begin = 0; begin < n_train; begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, n_train);
            const Tensor2 xb = take_rows(data.x_train, order, begin, end);
            const Tensor2 yb = take_rows(data.y_train, order, begin, end);

            const auto t0 = std::chrono::steady_clock::now();

            arch.f_a.zero_grads();
            arch.f_b.zero_grads();

            const Tensor2 y_a = arch.f_a.forward(xb);
            const Tensor2 y_r = arch.reservoir ? arch.reservoir->forward(y_a) : y_a;
            const Tensor2 y_hat = arch.f_b.forward(y_r);
            const double train_loss = loss.eval(y_hat, yb);

            if (!std::isfinite(train_loss)) {
                throw divergence_error("train: non-finite loss at iteration " +
                                       std::to_string(iteration));
            }
            if (!have_initial) {
                initial_loss = train_loss;
                result.initial_train_loss = train_loss;
                have_initial = true;
            } else if (train_loss > config.divergence_factor * std::max(initial_loss, 1e-12)) {
                throw divergence_error("train: loss " + std::to_string(train_loss) +
                                       " exceeded divergence guard at iteration " +
                                       std::to_string(iteration));
            }

            const Tensor2 dl_dyr = arch.f_b.backward_from_loss(loss, yb);

            GradientEstimate estimate;
            Tensor2 exact;
            const Tensor2* injected = nullptr;
            std::optional<double> sign_pct;
            if (arch.f_a_trainable) {
                if (runs_estimator) {
                    const EstimateContext ctx{arch.f_b, *arch.reservoir, y_a, y_r,
                                              yb,        loss,           dl_dyr};
                    switch (config.estimator.kind) {
                        case EstimatorKind::Bond:
                            estimate = bond_estimate(ctx, moments, estimator_rng, settings);
                            break;
                        case EstimatorKind::Bonds:
                            estimate = bonds_estimate(ctx, moments, estimator_rng, settings);
                            break;
                        case EstimatorKind::Spsa:
                            estimate = spsa_estimate(ctx, spsa, spsa_t++, estimator_rng);
                            break;
                        case EstimatorKind::Fdsa:
                            estimate = fdsa_estimate(ctx, spsa.mu_at(spsa_t++), estimator_rng);
                            break;
                        case EstimatorKind::Ad:
                            break;
                    }
                    if (compare_ad) {
                        exact = arch.reservoir->ad_gradient(dl_dyr);
                        sign_pct = 100.0 * sign_agreement(estimate.g_hat, exact);
                        estimate.sign_agreement_vs_ad = *sign_pct / 100.0;
                        sign_sum += *sign_pct;
                        ++sign_count;
                    }
                    arch.f_a.backward_from_gradient(estimate.g_hat);
                    injected = &estimate.g_hat;
                } else {
                    // exact path: chain through the reservoir graph (or directly)
                    exact = arch.reservoir ? arch.reservoir->ad_gradient(dl_dyr) : dl_dyr;
                    arch.f_a.backward_from_gradient(exact);
                    injected = &exact;
                }
                opt_a.step(arch.f_a, eta);
            }
            opt_b.step(arch.f_b, eta);

            const auto t1 = std::chrono::steady_clock::now();
            const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            loop_times.samples.push_back(ms);

            MetricsRecord record;
            record.iteration = iteration;
            record.epoch = epoch;
            record.train_loss = train_loss;
            record.test_loss = test_loss;
            record.sign_agreement_pct = sign_pct;
            record.loop_time_ms = ms;
            record.seed = config.seed;
            result.metrics.push_back(record);

            if (callback) {
                IterationStats stats;
                stats.iteration = iteration;
                stats.epoch = epoch;
                stats.train_loss = train_loss;
                stats.estimate = runs_estimator ? &estimate : nullptr;
                stats.exact_gradient = exact.empty() ? nullptr : &exact;
                stats.injected_gradient = injected;
                stats.f_a_hash = arch.f_a.param_hash();
                stats.f_b_hash = arch.f_b.param_hash();
                stats.reservoir_hash = arch.reservoir ? arch.reservoir->param_hash() : 0;
                callback(stats);
            }
            ++iteration;
        }
        test_loss = evaluate_loss(arch, loss, data.x_test, data.y_test);
    }

    result.final_train_loss = result.metrics.empty() ? 0.0 : result.metrics.back().train_loss;
    result.final_test_loss = test_loss;
    if (sign_count > 0) {
        result.mean_sign_agreement_pct = sign_sum / static_cast<double>(sign_count);
    }
    loop_times.finish(config.warmup_iterations, result);
    result.reservoir_frozen =
        !arch.reservoir || arch.reservoir->param_hash() == reservoir_hash0;
    return result;
}

LoopTimeStats measure_loop_time(const RunConfig& config, std::size_t timed_iterations,
                                std::size_t warmup_iterations) {
    if (timed_iterations == 0) throw parameter_error("measure_loop_time: nothing to time");
    const Dataset data = load_dataset(config.dataset, config.seed);
    const std::size_t per_epoch =
        (data.x_train.rows() + config.batch_size - 1) / config.batch_size;
    RunConfig trimmed = config;
    trimmed.epochs = (warmup_iterations + timed_iterations + per_epoch - 1) / per_epoch;
    trimmed.warmup_iterations = warmup_iterations;

    Architecture arch = assemble(trimmed.architecture, trimmed.seed);
    const TrainResult result = train(arch, data, trimmed);

    LoopTimeStats stats;
    std::vector<double> samples;
    for (std::size_t i = warmup_iterations;
         i < result.metrics.size() && samples.size() < timed_iterations; ++i) {
        samples.push_back(result.metrics[i].loop_time_ms);
    }
    if (samples.empty()) throw parameter_error("measure_loop_time: run too short");
    stats.timed_iterations = samples.size();
    stats.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) /
                    static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - stats.mean_ms) * (s - stats.mean_ms);
    stats.std_ms = std::sqrt(var / static_cast<double>(samples.size()));
    return stats;
}

namespace {

nlohmann::ordered_json record_to_json(const MetricsRecord& record, bool canonical) {
    nlohmann::ordered_json line;
    line["iteration"] = record.iteration;
    line["epoch"] = record.epoch;
    line["train_loss"] = record.train_loss;
    line["test_loss"] = record.test_loss;
    if (record.sign_agreement_pct) {
        line["sign_agreement_pct"] = *record.sign_agreement_pct;
    } else {
        line["sign_agreement_pct"] = nullptr;
    }
    line["loop_time_ms"] = canonical ? 0.0 : record.loop_time_ms;
    line["seed"] = record.seed;
    return line;
}

} // namespace

std::string metrics_to_jsonl(const std::vector<MetricsRecord>& records) {
    std::string out;
    for (const auto& record : records) {
        out += record_to_json(record, false).dump();
        out += '\n';
    }
    return out;
}

void write_metrics_jsonl(const std::string& path, const std::vector<MetricsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_metrics_jsonl: cannot open " + path);
    out << metrics_to_jsonl(records);
}

std::uint64_t metrics_canonical_hash(const std::vector<MetricsRecord>& records) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& record : records) {
        const std::string line = record_to_json(record, true).dump();
        for (unsigned char c : line) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace bond
