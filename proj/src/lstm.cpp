#include "fuelcast/lstm.hpp"

#include "fuelcast/errors.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fuelcast {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kSigmaFloor = 1e-6;
constexpr int kBatchSize = 32;

void validate_spec(const LstmSpec &spec) {
	if (spec.window < 1 || spec.hidden_dim < 1 || spec.n_layers < 1 || spec.horizon < 1 ||
	    spec.input_dim < 1) {
		throw ConfigError("LSTM spec dimensions must be positive");
	}
	if (!(spec.learning_rate > 0.0) || spec.patience < 1 || spec.max_epochs < 1) {
		throw ConfigError("LSTM training settings must be positive");
	}
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd &x) {
	return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// Per-layer, per-step forward cache for BPTT.
struct StepCache {
	Eigen::MatrixXd x; // layer input
	Eigen::MatrixXd h_prev, c_prev;
	Eigen::MatrixXd f, i, o, g;
	Eigen::MatrixXd c, tanh_c, h;
};

void cell_forward(const LstmLayerParams &lp, const Eigen::MatrixXd &x,
                  const Eigen::MatrixXd &h_prev, const Eigen::MatrixXd &c_prev, StepCache &cache) {
	const int hidden = static_cast<int>(lp.w_recurrent.cols());
	Eigen::MatrixXd z = lp.w_input * x + lp.w_recurrent * h_prev;
	z.colwise() += lp.bias;
	cache.x = x;
	cache.h_prev = h_prev;
	cache.c_prev = c_prev;
	cache.f = sigmoid(z.middleRows(0, hidden));
	cache.i = sigmoid(z.middleRows(hidden, hidden));
	cache.o = sigmoid(z.middleRows(2 * hidden, hidden));
	cache.g = z.middleRows(3 * hidden, hidden).array().tanh().matrix();
	cache.c = cache.f.cwiseProduct(c_prev) + cache.i.cwiseProduct(cache.g);
	cache.tanh_c = cache.c.array().tanh().matrix();
	cache.h = cache.o.cwiseProduct(cache.tanh_c);
}

// Backward through one cell step. dh/dc are gradients w.r.t. this step's h and
// c inputs from downstream; returns gradients w.r.t. x, h_prev, c_prev and
// accumulates parameter gradients.
void cell_backward(const LstmLayerParams &lp, const StepCache &cache, const Eigen::MatrixXd &dh,
                   const Eigen::MatrixXd &dc_in, LstmLayerParams &grads, Eigen::MatrixXd &dx,
                   Eigen::MatrixXd &dh_prev, Eigen::MatrixXd &dc_prev) {
	const int hidden = static_cast<int>(lp.w_recurrent.cols());
	const Eigen::MatrixXd do_ = dh.cwiseProduct(cache.tanh_c);
	const Eigen::MatrixXd dc =
	    dc_in + (dh.array() * cache.o.array() * (1.0 - cache.tanh_c.array().square())).matrix();
	const Eigen::MatrixXd df = dc.cwiseProduct(cache.c_prev);
	const Eigen::MatrixXd di = dc.cwiseProduct(cache.g);
	const Eigen::MatrixXd dg = dc.cwiseProduct(cache.i);
	dc_prev = dc.cwiseProduct(cache.f);

	Eigen::MatrixXd dz(4 * hidden, dh.cols());
	dz.middleRows(0, hidden) =
	    (df.array() * cache.f.array() * (1.0 - cache.f.array())).matrix();
	dz.middleRows(hidden, hidden) =
	    (di.array() * cache.i.array() * (1.0 - cache.i.array())).matrix();
	dz.middleRows(2 * hidden, hidden) =
	    (do_.array() * cache.o.array() * (1.0 - cache.o.array())).matrix();
	dz.middleRows(3 * hidden, hidden) = (dg.array() * (1.0 - cache.g.array().square())).matrix();

	grads.w_input.noalias() += dz * cache.x.transpose();
	grads.w_recurrent.noalias() += dz * cache.h_prev.transpose();
	grads.bias.noalias() += dz.rowwise().sum();
	dx.noalias() = lp.w_input.transpose() * dz;
	dh_prev.noalias() = lp.w_recurrent.transpose() * dz;
}

LstmLayerParams zero_layer(int hidden, int in) {
	LstmLayerParams lp;
	lp.w_input = Eigen::MatrixXd::Zero(4 * hidden, in);
	lp.w_recurrent = Eigen::MatrixXd::Zero(4 * hidden, hidden);
	lp.bias = Eigen::VectorXd::Zero(4 * hidden);
	return lp;
}

LstmGrads zero_grads(const LstmSpec &spec) {
	LstmGrads g;
	for (int l = 0; l < spec.n_layers; ++l) {
		const int in = l == 0 ? spec.input_dim : spec.hidden_dim;
		g.encoder.push_back(zero_layer(spec.hidden_dim, in));
		g.decoder.push_back(zero_layer(spec.hidden_dim, in));
	}
	g.head_weight = Eigen::VectorXd::Zero(spec.hidden_dim);
	g.head_bias = 0.0;
	g.log_sigma = 0.0;
	return g;
}

// Zeroes gradients in place so existing flat views stay valid; allocates only
// when the shapes do not match yet.
void reset_grads(LstmGrads &grads, const LstmSpec &spec) {
	const bool shaped =
	    grads.encoder.size() == static_cast<std::size_t>(spec.n_layers) &&
	    grads.decoder.size() == static_cast<std::size_t>(spec.n_layers) &&
	    grads.head_weight.size() == spec.hidden_dim &&
	    !grads.encoder.empty() &&
	    grads.encoder[0].w_input.cols() == spec.input_dim &&
	    grads.encoder[0].w_input.rows() == 4 * spec.hidden_dim;
	if (!shaped) {
		grads = zero_grads(spec);
		return;
	}
	for (auto *side : {&grads.encoder, &grads.decoder}) {
		for (auto &lp : *side) {
			lp.w_input.setZero();
			lp.w_recurrent.setZero();
			lp.bias.setZero();
		}
	}
	grads.head_weight.setZero();
	grads.head_bias = 0.0;
	grads.log_sigma = 0.0;
}

// Full forward pass over a batch; fills caches and per-step predictions.
struct BatchRun {
	std::vector<std::vector<StepCache>> enc; // [time][layer]
	std::vector<std::vector<StepCache>> dec;
	std::vector<Eigen::RowVectorXd> yhat;    // [horizon] (1 x B)
	std::vector<Eigen::RowVectorXd> target;  // [horizon]
	double loss = 0.0;
};

BatchRun run_batch(const LstmParams &params, const LstmTrainingData &data,
                   std::span<const int> idx, bool with_loss) {
	const LstmSpec &spec = params.spec;
	const int B = static_cast<int>(idx.size());
	const int H = spec.hidden_dim;
	const int W = spec.window;
	const int n_exog = spec.input_dim - 1;

	BatchRun run;
	run.enc.resize(static_cast<std::size_t>(W));
	run.dec.resize(static_cast<std::size_t>(spec.horizon));

	std::vector<Eigen::MatrixXd> state_h(static_cast<std::size_t>(spec.n_layers),
	                                     Eigen::MatrixXd::Zero(H, B));
	std::vector<Eigen::MatrixXd> state_c(static_cast<std::size_t>(spec.n_layers),
	                                     Eigen::MatrixXd::Zero(H, B));

	Eigen::MatrixXd input(spec.input_dim, B);
	for (int t = 0; t < W; ++t) {
		for (int b = 0; b < B; ++b) {
			const int base = idx[static_cast<std::size_t>(b)];
			input(0, b) = data.target[base + t];
			for (int e = 0; e < n_exog; ++e) {
				input(1 + e, b) = data.exog(base + t, e);
			}
		}
		auto &caches = run.enc[static_cast<std::size_t>(t)];
		caches.resize(static_cast<std::size_t>(spec.n_layers));
		const Eigen::MatrixXd *layer_in = &input;
		for (int l = 0; l < spec.n_layers; ++l) {
			auto &cache = caches[static_cast<std::size_t>(l)];
			cell_forward(params.encoder[static_cast<std::size_t>(l)], *layer_in,
			             state_h[static_cast<std::size_t>(l)], state_c[static_cast<std::size_t>(l)],
			             cache);
			state_h[static_cast<std::size_t>(l)] = cache.h;
			state_c[static_cast<std::size_t>(l)] = cache.c;
			layer_in = &cache.h;
		}
	}

	// Decoder starts from the encoder final state; first input is the last
	// observed target, afterwards its own previous prediction.
	const double sigma = params.sigma();
	const double sigma2 = sigma * sigma;
	Eigen::RowVectorXd prev_pred(B);
	for (int b = 0; b < B; ++b) {
		prev_pred(b) = data.target[idx[static_cast<std::size_t>(b)] + W - 1];
	}
	run.yhat.resize(static_cast<std::size_t>(spec.horizon));
	run.target.resize(static_cast<std::size_t>(spec.horizon));
	for (int t = 0; t < spec.horizon; ++t) {
		for (int b = 0; b < B; ++b) {
			const int base = idx[static_cast<std::size_t>(b)];
			input(0, b) = prev_pred(b);
			for (int e = 0; e < n_exog; ++e) {
				input(1 + e, b) = data.exog(base + W + t, e);
			}
		}
		auto &caches = run.dec[static_cast<std::size_t>(t)];
		caches.resize(static_cast<std::size_t>(spec.n_layers));
		const Eigen::MatrixXd *layer_in = &input;
		for (int l = 0; l < spec.n_layers; ++l) {
			auto &cache = caches[static_cast<std::size_t>(l)];
			cell_forward(params.decoder[static_cast<std::size_t>(l)], *layer_in,
			             state_h[static_cast<std::size_t>(l)], state_c[static_cast<std::size_t>(l)],
			             cache);
			state_h[static_cast<std::size_t>(l)] = cache.h;
			state_c[static_cast<std::size_t>(l)] = cache.c;
			layer_in = &cache.h;
		}
		Eigen::RowVectorXd pred =
		    params.head_weight.transpose() * state_h[static_cast<std::size_t>(spec.n_layers - 1)];
		pred.array() += params.head_bias;
		run.yhat[static_cast<std::size_t>(t)] = pred;
		prev_pred = pred;

		if (with_loss) {
			Eigen::RowVectorXd tgt(B);
			for (int b = 0; b < B; ++b) {
				tgt(b) = data.target[idx[static_cast<std::size_t>(b)] + W + t];
			}
			run.target[static_cast<std::size_t>(t)] = tgt;
			const double sq = (pred - tgt).squaredNorm();
			run.loss += static_cast<double>(B) * (params.log_sigma + 0.5 * kLog2Pi) +
			            sq / (2.0 * sigma2);
		}
	}
	return run;
}

} // namespace

CellState lstm_cell_step(const Eigen::VectorXd &x, const CellState &state,
                         const LstmLayerParams &params) {
	if (params.w_input.cols() != x.size() || params.w_recurrent.cols() != state.h.size() ||
	    state.h.size() != state.c.size() || params.w_input.rows() != 4 * state.h.size()) {
		throw ConfigError("LSTM cell dimension mismatch");
	}
	StepCache cache;
	cell_forward(params, x, state.h, state.c, cache);
	return {cache.h.col(0), cache.c.col(0)};
}

LstmParams init_lstm_params(const LstmSpec &spec) {
	validate_spec(spec);
	Rng rng(spec.seed);
	const double bound = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
	auto fill = [&](Eigen::MatrixXd &m) {
		for (Eigen::Index i = 0; i < m.size(); ++i) {
			m.data()[i] = rng.uniform(-bound, bound);
		}
	};
	LstmParams params;
	params.spec = spec;
	for (int l = 0; l < spec.n_layers; ++l) {
		const int in = l == 0 ? spec.input_dim : spec.hidden_dim;
		LstmLayerParams enc = zero_layer(spec.hidden_dim, in);
		fill(enc.w_input);
		fill(enc.w_recurrent);
		enc.bias.segment(0, spec.hidden_dim).setOnes(); // forget gate bias
		params.encoder.push_back(std::move(enc));
	}
	for (int l = 0; l < spec.n_layers; ++l) {
		const int in = l == 0 ? spec.input_dim : spec.hidden_dim;
		LstmLayerParams dec = zero_layer(spec.hidden_dim, in);
		fill(dec.w_input);
		fill(dec.w_recurrent);
		dec.bias.segment(0, spec.hidden_dim).setOnes();
		params.decoder.push_back(std::move(dec));
	}
	params.head_weight = Eigen::VectorXd::Zero(spec.hidden_dim);
	for (Eigen::Index i = 0; i < params.head_weight.size(); ++i) {
		params.head_weight[i] = rng.uniform(-bound, bound);
	}
	params.head_bias = 0.0;
	params.log_sigma = 0.0;
	return params;
}

LstmForecast lstm_forward(const LstmParams &params, const Eigen::MatrixXd &window,
                          const Eigen::MatrixXd &future_exog) {
	const LstmSpec &spec = params.spec;
	if (window.rows() != spec.window || window.cols() != spec.input_dim) {
		throw ConfigError("window matrix must be window x input_dim");
	}
	const int n_exog = spec.input_dim - 1;
	if (n_exog > 0 && (future_exog.rows() < spec.horizon || future_exog.cols() != n_exog)) {
		throw ConfigError("future exogenous matrix must be horizon x (input_dim - 1)");
	}

	// Reuse the batched path with a single synthetic sample: concatenate the
	// window target with placeholder horizon targets.
	LstmTrainingData data;
	data.window = spec.window;
	data.horizon = spec.horizon;
	data.n_samples = 1;
	data.target = Eigen::VectorXd::Zero(spec.window + spec.horizon);
	data.target.segment(0, spec.window) = window.col(0);
	data.exog = Eigen::MatrixXd::Zero(spec.window + spec.horizon, std::max(0, n_exog));
	for (int e = 0; e < n_exog; ++e) {
		data.exog.block(0, e, spec.window, 1) = window.col(1 + e);
		data.exog.block(spec.window, e, spec.horizon, 1) =
		    future_exog.block(0, e, spec.horizon, 1);
	}
	const int index = 0;
	const BatchRun run = run_batch(params, data, std::span<const int>(&index, 1), false);
	LstmForecast out;
	out.mean.resize(spec.horizon);
	for (int t = 0; t < spec.horizon; ++t) {
		out.mean[t] = run.yhat[static_cast<std::size_t>(t)](0);
	}
	out.sigma = params.sigma();
	return out;
}

double nll_loss(std::span<const double> predicted, std::span<const double> targets, double sigma) {
	if (predicted.size() != targets.size() || predicted.empty()) {
		throw ConfigError("NLL needs equal nonzero lengths");
	}
	if (!(sigma > 0.0)) {
		throw ConfigError("NLL sigma must be positive");
	}
	const double log_sigma = std::log(sigma);
	double loss = 0.0;
	for (std::size_t i = 0; i < predicted.size(); ++i) {
		const double err = targets[i] - predicted[i];
		loss += log_sigma + 0.5 * kLog2Pi + err * err / (2.0 * sigma * sigma);
	}
	return loss;
}

LstmTrainingData build_training_data(std::span<const double> target, const Eigen::MatrixXd &exog,
                                     const LstmSpec &spec) {
	validate_spec(spec);
	const int n_exog = spec.input_dim - 1;
	if (exog.cols() != n_exog) {
		throw ConfigError("expected " + std::to_string(n_exog) + " exogenous columns, got " +
		                  std::to_string(exog.cols()));
	}
	if (n_exog > 0 && exog.rows() != static_cast<Eigen::Index>(target.size())) {
		throw ConfigError("exogenous rows must match the target length");
	}
	const long n = static_cast<long>(target.size());
	const long n_samples = n - spec.window - spec.horizon + 1;
	if (n_samples < 1) {
		throw ConfigError("window + horizon (" + std::to_string(spec.window + spec.horizon) +
		                  ") exceeds series length " + std::to_string(n));
	}
	LstmTrainingData data;
	data.window = spec.window;
	data.horizon = spec.horizon;
	data.n_samples = static_cast<int>(n_samples);
	data.target = Eigen::Map<const Eigen::VectorXd>(target.data(), n);
	data.exog = n_exog > 0 ? exog : Eigen::MatrixXd::Zero(n, 0);
	return data;
}

LstmTrainingData build_training_data(const DailySeries &series, const LstmSpec &spec) {
	const int n_exog = spec.input_dim - 1;
	if (n_exog > static_cast<int>(series.exog().size())) {
		throw ConfigError("series provides fewer exogenous columns than input_dim requires");
	}
	Eigen::MatrixXd exog(static_cast<Eigen::Index>(series.size()), n_exog);
	for (int e = 0; e < n_exog; ++e) {
		const auto &col = series.exog()[static_cast<std::size_t>(e)].values;
		exog.col(e) = Eigen::Map<const Eigen::VectorXd>(col.data(),
		                                                static_cast<Eigen::Index>(col.size()));
	}
	return build_training_data(series.values(), exog, spec);
}

double lstm_loss_and_gradients(const LstmParams &params, const LstmTrainingData &data,
                               std::span<const int> sample_indices, LstmGrads &grads) {
	const LstmSpec &spec = params.spec;
	const int B = static_cast<int>(sample_indices.size());
	const int H = spec.hidden_dim;
	const int top = spec.n_layers - 1;
	reset_grads(grads, spec);

	BatchRun run = run_batch(params, data, sample_indices, true);
	const double sigma = params.sigma();
	const double sigma2 = sigma * sigma;

	std::vector<Eigen::MatrixXd> dstate_h(static_cast<std::size_t>(spec.n_layers),
	                                      Eigen::MatrixXd::Zero(H, B));
	std::vector<Eigen::MatrixXd> dstate_c(static_cast<std::size_t>(spec.n_layers),
	                                      Eigen::MatrixXd::Zero(H, B));
	Eigen::RowVectorXd feedback = Eigen::RowVectorXd::Zero(B);

	Eigen::MatrixXd dx, dh_prev, dc_prev;
	for (int t = spec.horizon - 1; t >= 0; --t) {
		const Eigen::RowVectorXd err =
		    run.yhat[static_cast<std::size_t>(t)] - run.target[static_cast<std::size_t>(t)];
		grads.log_sigma += static_cast<double>(B) - err.squaredNorm() / sigma2;
		const Eigen::RowVectorXd dyhat = err / sigma2 + feedback;

		const Eigen::MatrixXd &h_top = run.dec[static_cast<std::size_t>(t)]
		                                   [static_cast<std::size_t>(top)].h;
		grads.head_weight.noalias() += h_top * dyhat.transpose();
		grads.head_bias += dyhat.sum();

		Eigen::MatrixXd from_above;
		for (int l = top; l >= 0; --l) {
			Eigen::MatrixXd dh = dstate_h[static_cast<std::size_t>(l)];
			if (l == top) {
				dh.noalias() += params.head_weight * dyhat;
			} else {
				dh += from_above;
			}
			cell_backward(params.decoder[static_cast<std::size_t>(l)],
			              run.dec[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)], dh,
			              dstate_c[static_cast<std::size_t>(l)],
			              grads.decoder[static_cast<std::size_t>(l)], dx, dh_prev, dc_prev);
			dstate_h[static_cast<std::size_t>(l)] = dh_prev;
			dstate_c[static_cast<std::size_t>(l)] = dc_prev;
			from_above = dx;
		}
		// Row 0 of the bottom-layer input is the previous prediction: gradient
		// flows back through the feedback loop (except at t = 0, where the input
		// is observed data).
		feedback = t > 0 ? Eigen::RowVectorXd(from_above.row(0)) : Eigen::RowVectorXd::Zero(B);
	}

	for (int t = spec.window - 1; t >= 0; --t) {
		Eigen::MatrixXd from_above;
		for (int l = top; l >= 0; --l) {
			Eigen::MatrixXd dh = dstate_h[static_cast<std::size_t>(l)];
			if (l != top) {
				dh += from_above;
			}
			cell_backward(params.encoder[static_cast<std::size_t>(l)],
			              run.enc[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)], dh,
			              dstate_c[static_cast<std::size_t>(l)],
			              grads.encoder[static_cast<std::size_t>(l)], dx, dh_prev, dc_prev);
			dstate_h[static_cast<std::size_t>(l)] = dh_prev;
			dstate_c[static_cast<std::size_t>(l)] = dc_prev;
			from_above = dx;
		}
	}
	return run.loss;
}

double lstm_loss(const LstmParams &params, const LstmTrainingData &data,
                 std::span<const int> sample_indices) {
	const BatchRun run = run_batch(params, data, sample_indices, true);
	return run.loss;
}

std::vector<std::span<double>> parameter_views(LstmParams &params) {
	std::vector<std::span<double>> views;
	auto add_layers = [&](std::vector<LstmLayerParams> &layers) {
		for (auto &lp : layers) {
			views.emplace_back(lp.w_input.data(), static_cast<std::size_t>(lp.w_input.size()));
			views.emplace_back(lp.w_recurrent.data(),
			                   static_cast<std::size_t>(lp.w_recurrent.size()));
			views.emplace_back(lp.bias.data(), static_cast<std::size_t>(lp.bias.size()));
		}
	};
	add_layers(params.encoder);
	add_layers(params.decoder);
	views.emplace_back(params.head_weight.data(),
	                   static_cast<std::size_t>(params.head_weight.size()));
	views.emplace_back(&params.head_bias, 1);
	views.emplace_back(&params.log_sigma, 1);
	return views;
}

std::vector<std::span<double>> gradient_views(LstmGrads &grads) {
	std::vector<std::span<double>> views;
	auto add_layers = [&](std::vector<LstmLayerParams> &layers) {
		for (auto &lp : layers) {
			views.emplace_back(lp.w_input.data(), static_cast<std::size_t>(lp.w_input.size()));
			views.emplace_back(lp.w_recurrent.data(),
			                   static_cast<std::size_t>(lp.w_recurrent.size()));
			views.emplace_back(lp.bias.data(), static_cast<std::size_t>(lp.bias.size()));
		}
	};
	add_layers(grads.encoder);
	add_layers(grads.decoder);
	views.emplace_back(grads.head_weight.data(),
	                   static_cast<std::size_t>(grads.head_weight.size()));
	views.emplace_back(&grads.head_bias, 1);
	views.emplace_back(&grads.log_sigma, 1);
	return views;
}

std::vector<std::string> parameter_group_names(const LstmSpec &spec) {
	std::vector<std::string> names;
	auto add = [&](const std::string &role) {
		for (int l = 0; l < spec.n_layers; ++l) {
			names.push_back(role + "." + std::to_string(l) + ".w_input");
			names.push_back(role + "." + std::to_string(l) + ".w_recurrent");
			names.push_back(role + "." + std::to_string(l) + ".bias");
		}
	};
	add("encoder");
	add("decoder");
	names.push_back("head.weight");
	names.push_back("head.bias");
	names.push_back("log_sigma");
	return names;
}

LstmTrainResult train_lstm(const LstmTrainingData &data, const LstmSpec &spec) {
	validate_spec(spec);
	if (data.n_samples < 2) {
		throw ConfigError("need at least 2 window samples (one train, one validation), got " +
		                  std::to_string(data.n_samples));
	}
	int n_val = static_cast<int>(
	    std::lround(spec.val_fraction * static_cast<double>(data.n_samples)));
	n_val = std::max(1, std::min(n_val, data.n_samples - 1));
	const int n_train = data.n_samples - n_val;

	std::vector<int> train_idx(static_cast<std::size_t>(n_train));
	std::iota(train_idx.begin(), train_idx.end(), 0);
	std::vector<int> val_idx(static_cast<std::size_t>(n_val));
	std::iota(val_idx.begin(), val_idx.end(), n_train);

	LstmParams params = init_lstm_params(spec);
	LstmGrads grads = zero_grads(spec);
	auto views = parameter_views(params);
	auto gviews = gradient_views(grads);

	// Adam state aligned with the flat parameter views.
	std::vector<std::vector<double>> m(views.size()), v(views.size());
	for (std::size_t k = 0; k < views.size(); ++k) {
		m[k].assign(views[k].size(), 0.0);
		v[k].assign(views[k].size(), 0.0);
	}
	constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
	long step = 0;

	Rng shuffle_rng(spec.seed + 1);
	LstmTrainResult result;
	double best_val = std::numeric_limits<double>::infinity();
	LstmParams best_params = params;
	int stall = 0;

	const double log_sigma_floor = std::log(kSigmaFloor);
	for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
		shuffle_rng.shuffle(train_idx);
		double epoch_loss = 0.0;
		for (std::size_t at = 0; at < train_idx.size(); at += kBatchSize) {
			const std::size_t len = std::min<std::size_t>(kBatchSize, train_idx.size() - at);
			const std::span<const int> batch(train_idx.data() + at, len);
			epoch_loss += lstm_loss_and_gradients(params, data, batch, grads);
			++step;
			const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
			const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
			for (std::size_t k = 0; k < views.size(); ++k) {
				for (std::size_t j = 0; j < views[k].size(); ++j) {
					const double g = gviews[k][j];
					m[k][j] = beta1 * m[k][j] + (1.0 - beta1) * g;
					v[k][j] = beta2 * v[k][j] + (1.0 - beta2) * g * g;
					views[k][j] -= spec.learning_rate * (m[k][j] / bc1) /
					               (std::sqrt(v[k][j] / bc2) + eps);
				}
			}
			params.log_sigma = std::max(params.log_sigma, log_sigma_floor);
		}
		const double val = lstm_loss(params, data, val_idx);
		EpochStats stats;
		stats.train_nll_per_term =
		    epoch_loss / (static_cast<double>(n_train) * static_cast<double>(spec.horizon));
		stats.val_nll_per_term =
		    val / (static_cast<double>(n_val) * static_cast<double>(spec.horizon));
		result.trace.push_back(stats);
		result.epochs_run = epoch;

		if (val < best_val) {
			best_val = val;
			best_params = params;
			result.best_epoch = epoch;
			stall = 0;
		} else if (++stall >= spec.patience) {
			break;
		}
	}
	result.params = std::move(best_params);
	return result;
}

LstmTrainResult train_lstm(const DailySeries &series, const LstmSpec &spec) {
	return train_lstm(build_training_data(series, spec), spec);
}

std::string lstm_checkpoint(const LstmParams &params) {
	std::ostringstream out;
	const LstmSpec &s = params.spec;
	out << "kind=lstm\n";
	out << "window=" << s.window << "\nhidden_dim=" << s.hidden_dim
	    << "\nn_layers=" << s.n_layers << "\nhorizon=" << s.horizon
	    << "\ninput_dim=" << s.input_dim << "\nlearning_rate=" << format_double(s.learning_rate)
	    << "\npatience=" << s.patience << "\nmax_epochs=" << s.max_epochs << "\nseed=" << s.seed
	    << "\nval_fraction=" << format_double(s.val_fraction) << "\n";
	out << "head_bias=" << format_double(params.head_bias) << "\n";
	out << "log_sigma=" << format_double(params.log_sigma) << "\n";

	auto write_tensor = [&](const std::string &name, const Eigen::MatrixXd &mat) {
		out << "tensor " << name << ' ' << mat.rows() << ' ' << mat.cols() << '\n';
		for (Eigen::Index r = 0; r < mat.rows(); ++r) {
			for (Eigen::Index c = 0; c < mat.cols(); ++c) {
				out << (c > 0 ? " " : "") << format_double(mat(r, c));
			}
			out << '\n';
		}
	};
	for (std::size_t l = 0; l < params.encoder.size(); ++l) {
		const std::string prefix = "encoder." + std::to_string(l) + ".";
		write_tensor(prefix + "w_input", params.encoder[l].w_input);
		write_tensor(prefix + "w_recurrent", params.encoder[l].w_recurrent);
		write_tensor(prefix + "bias", params.encoder[l].bias);
	}
	for (std::size_t l = 0; l < params.decoder.size(); ++l) {
		const std::string prefix = "decoder." + std::to_string(l) + ".";
		write_tensor(prefix + "w_input", params.decoder[l].w_input);
		write_tensor(prefix + "w_recurrent", params.decoder[l].w_recurrent);
		write_tensor(prefix + "bias", params.decoder[l].bias);
	}
	write_tensor("head.weight", params.head_weight);
	return out.str();
}

LstmParams lstm_from_checkpoint(const std::string &content) {
	std::istringstream in(content);
	std::string line;
	LstmSpec spec;
	double head_bias = 0.0, log_sigma = 0.0;
	std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

	while (std::getline(in, line)) {
		if (line.empty() || line[0] == '#') {
			continue;
		}
		if (line.rfind("tensor ", 0) == 0) {
			std::istringstream hs(line.substr(7));
			std::string name;
			Eigen::Index rows, cols;
			hs >> name >> rows >> cols;
			Eigen::MatrixXd mat(rows, cols);
			for (Eigen::Index r = 0; r < rows; ++r) {
				if (!std::getline(in, line)) {
					throw DataError("truncated tensor '" + name + "' in checkpoint");
				}
				std::istringstream rs(line);
				std::string field;
				for (Eigen::Index c = 0; c < cols; ++c) {
					if (!(rs >> field)) {
						throw DataError("short row in tensor '" + name + "'");
					}
					mat(r, c) = parse_double(field);
				}
			}
			tensors.emplace_back(name, std::move(mat));
			continue;
		}
		const auto eq = line.find('=');
		if (eq == std::string::npos) {
			throw DataError("malformed checkpoint line: '" + line + "'");
		}
		const std::string key = line.substr(0, eq);
		const std::string value = line.substr(eq + 1);
		if (key == "kind") {
			if (value != "lstm") {
				throw DataError("checkpoint is not an lstm model");
			}
		} else if (key == "window") {
			spec.window = std::stoi(value);
		} else if (key == "hidden_dim") {
			spec.hidden_dim = std::stoi(value);
		} else if (key == "n_layers") {
			spec.n_layers = std::stoi(value);
		} else if (key == "horizon") {
			spec.horizon = std::stoi(value);
		} else if (key == "input_dim") {
			spec.input_dim = std::stoi(value);
		} else if (key == "learning_rate") {
			spec.learning_rate = parse_double(value);
		} else if (key == "patience") {
			spec.patience = std::stoi(value);
		} else if (key == "max_epochs") {
			spec.max_epochs = std::stoi(value);
		} else if (key == "seed") {
			spec.seed = std::stoull(value);
		} else if (key == "val_fraction") {
			spec.val_fraction = parse_double(value);
		} else if (key == "head_bias") {
			head_bias = parse_double(value);
		} else if (key == "log_sigma") {
			log_sigma = parse_double(value);
		} else {
			throw DataError("unknown checkpoint key '" + key + "'");
		}
	}

	LstmParams params = init_lstm_params(spec);
	params.head_bias = head_bias;
	params.log_sigma = log_sigma;
	auto take = [&](const std::string &name) -> const Eigen::MatrixXd & {
		for (const auto &[n, mat] : tensors) {
			if (n == name) {
				return mat;
			}
		}
		throw DataError("checkpoint missing tensor '" + name + "'");
	};
	for (int l = 0; l < spec.n_layers; ++l) {
		const std::string prefix = "encoder." + std::to_string(l) + ".";
		params.encoder[static_cast<std::size_t>(l)].w_input = take(prefix + "w_input");
		params.encoder[static_cast<std::size_t>(l)].w_recurrent = take(prefix + "w_recurrent");
		params.encoder[static_cast<std::size_t>(l)].bias = take(prefix + "bias");
	}
	for (int l = 0; l < spec.n_layers; ++l) {
		const std::string prefix = "decoder." + std::to_string(l) + ".";
		params.decoder[static_cast<std::size_t>(l)].w_input = take(prefix + "w_input");
		params.decoder[static_cast<std::size_t>(l)].w_recurrent = take(prefix + "w_recurrent");
		params.decoder[static_cast<std::size_t>(l)].bias = take(prefix + "bias");
	}
	params.head_weight = take("head.weight");
	return params;
}

} // namespace fuelcast
