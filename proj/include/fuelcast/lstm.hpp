#pragma once

#include "fuelcast/series.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fuelcast {

struct LstmSpec {
	int window = 28;
	int hidden_dim = 32;
	int n_layers = 1;
	int horizon = 30;
	int input_dim = 1; // 1 univariate, 1 + n_exog multivariate
	double learning_rate = 0.01;
	int patience = 10;
	int max_epochs = 500;
	std::uint64_t seed = 0;
	// Chronological tail share of window samples held out for early stopping.
	double val_fraction = 0.15;
};

// Gate order inside the fused 4H rows: forget, input, output, candidate.
struct LstmLayerParams {
	Eigen::MatrixXd w_input;     // 4H x in
	Eigen::MatrixXd w_recurrent; // 4H x H
	Eigen::VectorXd bias;        // 4H
};

struct LstmParams {
	LstmSpec spec;
	std::vector<LstmLayerParams> encoder;
	std::vector<LstmLayerParams> decoder;
	Eigen::VectorXd head_weight; // H -> scalar prediction
	double head_bias = 0.0;
	double log_sigma = 0.0;

	double sigma() const { return std::exp(log_sigma); }
};

// Gradient accumulator with the same shapes as LstmParams.
struct LstmGrads {
	std::vector<LstmLayerParams> encoder;
	std::vector<LstmLayerParams> decoder;
	Eigen::VectorXd head_weight;
	double head_bias = 0.0;
	double log_sigma = 0.0;
};

struct CellState {
	Eigen::VectorXd h;
	Eigen::VectorXd c;
};

// Single LSTM cell update: f,i,o = sigmoid, g = tanh of affine maps of
// [h_prev; x]; c = f*c_prev + i*g; h = o*tanh(c).
CellState lstm_cell_step(const Eigen::VectorXd &x, const CellState &state,
                         const LstmLayerParams &params);

// Deterministic parameter init: uniform(-1/sqrt(H), 1/sqrt(H)) weights,
// forget-gate bias 1, log_sigma 0.
LstmParams init_lstm_params(const LstmSpec &spec);

struct LstmForecast {
	Eigen::VectorXd mean; // horizon entries
	double sigma = 0.0;
};

// Encoder consumes the window (W x input_dim); decoder starts from the encoder
// state and feeds back its own predictions. future_exog (horizon x n_exog) is
// required when input_dim > 1.
LstmForecast lstm_forward(const LstmParams &params, const Eigen::MatrixXd &window,
                          const Eigen::MatrixXd &future_exog = {});

// Gaussian negative log-likelihood summed over every sample and horizon step.
double nll_loss(std::span<const double> predicted, std::span<const double> targets, double sigma);

// Window/horizon samples extracted from a series (values used as given; callers
// standardize). A series of length L yields L - W - horizon + 1 samples.
struct LstmTrainingData {
	Eigen::VectorXd target;
	Eigen::MatrixXd exog; // n x (input_dim - 1)
	int window = 0;
	int horizon = 0;
	int n_samples = 0;
};

LstmTrainingData build_training_data(const DailySeries &series, const LstmSpec &spec);
LstmTrainingData build_training_data(std::span<const double> target,
                                     const Eigen::MatrixXd &exog, const LstmSpec &spec);

// Total NLL over the given samples plus analytic BPTT gradients (accumulated
// into `grads`, which is zero-initialized here).
double lstm_loss_and_gradients(const LstmParams &params, const LstmTrainingData &data,
                               std::span<const int> sample_indices, LstmGrads &grads);
// Loss only (validation scoring).
double lstm_loss(const LstmParams &params, const LstmTrainingData &data,
                 std::span<const int> sample_indices);

struct EpochStats {
	double train_nll_per_term = 0.0;
	double val_nll_per_term = 0.0;
};

struct LstmTrainResult {
	LstmParams params; // snapshot from the best validation epoch
	std::vector<EpochStats> trace;
	int best_epoch = 0; // 1-based
	int epochs_run = 0;
};

// Mini-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8, batch 32) on the NLL with
// early stopping on validation NLL. Fully reproducible given spec.seed.
LstmTrainResult train_lstm(const DailySeries &series, const LstmSpec &spec);
LstmTrainResult train_lstm(const LstmTrainingData &data, const LstmSpec &spec);

// Flat views over every trainable parameter, in a fixed order (used by the
// optimizer and by gradient checks).
std::vector<std::span<double>> parameter_views(LstmParams &params);
std::vector<std::span<double>> gradient_views(LstmGrads &grads);
std::vector<std::string> parameter_group_names(const LstmSpec &spec);

// Text checkpoint: spec fields plus a shape-manifest tensor list. Reload
// reproduces forward outputs bit-for-bit.
std::string lstm_checkpoint(const LstmParams &params);
LstmParams lstm_from_checkpoint(const std::string &content);

} // namespace fuelcast
