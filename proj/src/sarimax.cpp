#include "fuelcast/sarimax.hpp"

#include "fuelcast/errors.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/optim.hpp"
#include "fuelcast/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fuelcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_spec(const SarimaxSpec &spec) {
	if (spec.p < 0 || spec.d < 0 || spec.q < 0 || spec.P < 0 || spec.D < 0 || spec.Q < 0) {
		throw ConfigError("SARIMA orders must be non-negative");
	}
	if (spec.P + spec.D + spec.Q > 0 && spec.s < 2) {
		throw ConfigError("seasonal period s must be >= 2 when seasonal orders are used");
	}
}

std::vector<double> apply_differencing(std::span<const double> xs, int d, int D, int s) {
	std::vector<double> out(xs.begin(), xs.end());
	for (int i = 0; i < D; ++i) {
		out = difference(out, static_cast<std::size_t>(s));
	}
	for (int i = 0; i < d; ++i) {
		out = difference(out, 1);
	}
	return out;
}

// Filters innovations a_t = w_t - sum pf_j w_{t-j} + sum mf_j a_{t-j}, with
// a_t = 0 for t < burnin. Returns the conditional sum of squares over
// t in [burnin, n).
double css_filter(std::span<const double> w, std::span<const double> pf,
                  std::span<const double> mf, std::size_t burnin, std::vector<double> &a) {
	const std::size_t n = w.size();
	const std::size_t pp = pf.size();
	const std::size_t qq = mf.size();
	a.assign(n, 0.0);
	double ssq = 0.0;
	for (std::size_t t = burnin; t < n; ++t) {
		double v = w[t];
		const std::size_t jmaxp = std::min(pp, t);
		for (std::size_t j = 1; j <= jmaxp; ++j) {
			v -= pf[j - 1] * w[t - j];
		}
		const std::size_t jmaxq = std::min(qq, t);
		for (std::size_t j = 1; j <= jmaxq; ++j) {
			v += mf[j - 1] * a[t - j];
		}
		a[t] = v;
		ssq += v * v;
	}
	return ssq;
}

struct ParamLayout {
	int p, q, P, Q;
	int n_exog;
	bool intercept;

	int total() const { return p + q + P + Q + n_exog + (intercept ? 1 : 0); }
	int ar_at() const { return 0; }
	int ma_at() const { return p; }
	int sar_at() const { return p + q; }
	int sma_at() const { return p + q + P; }
	int beta_at() const { return p + q + P + Q; }
	int intercept_at() const { return p + q + P + Q + n_exog; }
};

struct Decoded {
	std::vector<double> ar, ma, sar, sma, beta;
	double intercept = 0.0;
};

Decoded decode(const std::vector<double> &params, const ParamLayout &lay) {
	Decoded d;
	auto block = [&](int at, int len) {
		return std::span<const double>(params.data() + at, static_cast<std::size_t>(len));
	};
	d.ar = pacf_transform(block(lay.ar_at(), lay.p));
	d.ma = pacf_transform(block(lay.ma_at(), lay.q));
	d.sar = pacf_transform(block(lay.sar_at(), lay.P));
	d.sma = pacf_transform(block(lay.sma_at(), lay.Q));
	d.beta.assign(params.begin() + lay.beta_at(), params.begin() + lay.beta_at() + lay.n_exog);
	d.intercept = lay.intercept ? params[static_cast<std::size_t>(lay.intercept_at())] : 0.0;
	return d;
}

// Precomputed differenced data shared by every objective evaluation.
struct CssContext {
	std::vector<double> dy;
	std::vector<std::vector<double>> dx;
	std::size_t burnin = 0;
	std::size_t n_eff = 0;
	int s = 7;

	// Scratch buffers.
	mutable std::vector<double> w, a;

	void regression_adjust(const Decoded &dec) const {
		const std::size_t n = dy.size();
		w.assign(dy.begin(), dy.end());
		for (std::size_t k = 0; k < dx.size(); ++k) {
			const double b = dec.beta[k];
			if (b == 0.0) {
				continue;
			}
			const double *xk = dx[k].data();
			for (std::size_t t = 0; t < n; ++t) {
				w[t] -= b * xk[t];
			}
		}
		if (dec.intercept != 0.0) {
			for (std::size_t t = 0; t < n; ++t) {
				w[t] -= dec.intercept;
			}
		}
	}

	double sum_squares(const Decoded &dec) const {
		regression_adjust(dec);
		const auto pf = expand_seasonal_polynomial(dec.ar, dec.sar, s);
		const auto mf = expand_seasonal_polynomial(dec.ma, dec.sma, s);
		return css_filter(w, pf, mf, burnin, a);
	}
};

CssContext build_context(const DailySeries &series, const SarimaxSpec &spec) {
	CssContext ctx;
	ctx.s = spec.s;
	const int seasonal_span = spec.D * spec.s;
	if (series.size() <= static_cast<std::size_t>(spec.d + seasonal_span)) {
		throw ConfigError("series too short for the requested differencing");
	}
	ctx.dy = apply_differencing(series.values(), spec.d, spec.D, spec.s);
	for (const auto &name : spec.exog_names) {
		ctx.dx.push_back(apply_differencing(series.exog_column(name).values, spec.d, spec.D, spec.s));
	}
	ctx.burnin = static_cast<std::size_t>(
	    std::max(spec.p + spec.s * spec.P, spec.q + spec.s * spec.Q));
	if (ctx.dy.size() <= ctx.burnin) {
		throw ConfigError("series too short for model burn-in after differencing");
	}
	ctx.n_eff = ctx.dy.size() - ctx.burnin;
	return ctx;
}

std::vector<double> initial_parameters(const CssContext &ctx, const ParamLayout &lay) {
	std::vector<double> params(static_cast<std::size_t>(lay.total()), 0.0);
	// AR/MA blocks start at coefficient value 0.1 each, mapped into the
	// unconstrained PACF space.
	auto seed_block = [&](int at, int len) {
		if (len == 0) {
			return;
		}
		const std::vector<double> coeffs(static_cast<std::size_t>(len), 0.1);
		const auto raw = pacf_transform_inverse(coeffs);
		std::copy(raw.begin(), raw.end(), params.begin() + at);
	};
	seed_block(lay.ar_at(), lay.p);
	seed_block(lay.ma_at(), lay.q);
	seed_block(lay.sar_at(), lay.P);
	seed_block(lay.sma_at(), lay.Q);

	// OLS for the regression block (exog and intercept) on the differenced scale.
	const int ncols = lay.n_exog + (lay.intercept ? 1 : 0);
	if (ncols > 0) {
		const Eigen::Index n = static_cast<Eigen::Index>(ctx.dy.size());
		Eigen::MatrixXd X(n, ncols);
		for (int k = 0; k < lay.n_exog; ++k) {
			X.col(k) = Eigen::Map<const Eigen::VectorXd>(ctx.dx[static_cast<std::size_t>(k)].data(), n);
		}
		if (lay.intercept) {
			X.col(ncols - 1).setOnes();
		}
		const Eigen::Map<const Eigen::VectorXd> y(ctx.dy.data(), n);
		const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
		for (int k = 0; k < lay.n_exog; ++k) {
			params[static_cast<std::size_t>(lay.beta_at() + k)] = beta[k];
		}
		if (lay.intercept) {
			params[static_cast<std::size_t>(lay.intercept_at())] = beta[ncols - 1];
		}
	}
	return params;
}

void finalize_fit(SarimaxFit &fit, const CssContext &ctx, const Decoded &dec) {
	fit.ar = dec.ar;
	fit.ma = dec.ma;
	fit.seasonal_ar = dec.sar;
	fit.seasonal_ma = dec.sma;
	fit.exog_coef = dec.beta;
	fit.intercept = dec.intercept;

	const double ssq = ctx.sum_squares(dec);
	const double n_eff = static_cast<double>(ctx.n_eff);
	fit.sigma2 = ssq / n_eff;
	fit.loglik = -0.5 * n_eff * (std::log(2.0 * M_PI) + std::log(fit.sigma2) + 1.0);
	fit.residuals.assign(ctx.a.begin() + static_cast<std::ptrdiff_t>(ctx.burnin), ctx.a.end());
	fit.residual_offset =
	    static_cast<std::size_t>(fit.spec.d + fit.spec.s * fit.spec.D) + ctx.burnin;
}

} // namespace

int SarimaxSpec::parameter_count() const {
	return p + q + P + Q + static_cast<int>(exog_names.size()) + (has_intercept() ? 1 : 0);
}

std::string SarimaxSpec::label() const {
	std::ostringstream os;
	os << (exog_names.empty() ? "sarima" : "sarimax") << "(" << p << "," << d << "," << q << ")x("
	   << P << "," << D << "," << Q << "," << s << ")";
	return os.str();
}

std::vector<double> pacf_transform(std::span<const double> raw) {
	const std::size_t n = raw.size();
	std::vector<double> coeffs(n);
	for (std::size_t i = 0; i < n; ++i) {
		coeffs[i] = std::tanh(raw[i]);
	}
	std::vector<double> work(coeffs);
	for (std::size_t j = 1; j < n; ++j) {
		const double a = coeffs[j];
		for (std::size_t k = 0; k < j; ++k) {
			work[k] -= a * coeffs[j - k - 1];
		}
		std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(j), coeffs.begin());
	}
	return coeffs;
}

std::vector<double> pacf_transform_inverse(std::span<const double> coeffs) {
	const std::size_t n = coeffs.size();
	std::vector<double> work(coeffs.begin(), coeffs.end());
	std::vector<double> temp(n);
	for (std::size_t j = n; j-- > 1;) {
		const double a = work[j];
		const double denom = 1.0 - a * a;
		if (denom <= 0.0) {
			throw EstimationError("polynomial is not inside the stationarity region");
		}
		for (std::size_t k = 0; k < j; ++k) {
			temp[k] = (work[k] + a * work[j - k - 1]) / denom;
		}
		std::copy(temp.begin(), temp.begin() + static_cast<std::ptrdiff_t>(j), work.begin());
	}
	for (std::size_t i = 0; i < n; ++i) {
		if (std::abs(work[i]) >= 1.0) {
			throw EstimationError("partial autocorrelation outside (-1, 1)");
		}
		work[i] = std::atanh(work[i]);
	}
	return work;
}

std::vector<double> expand_seasonal_polynomial(std::span<const double> nonseasonal,
                                               std::span<const double> seasonal, int period) {
	const std::size_t np = nonseasonal.size();
	const std::size_t ns = seasonal.size();
	const std::size_t s = static_cast<std::size_t>(period);
	std::vector<double> full(np + ns * s, 0.0);
	for (std::size_t i = 0; i < np; ++i) {
		full[i] = nonseasonal[i];
	}
	for (std::size_t j = 0; j < ns; ++j) {
		full[(j + 1) * s - 1] += seasonal[j];
		for (std::size_t i = 0; i < np; ++i) {
			full[(j + 1) * s + i] -= nonseasonal[i] * seasonal[j];
		}
	}
	return full;
}

SarimaxFit fit_sarimax(const DailySeries &series, const SarimaxSpec &spec) {
	validate_spec(spec);
	const CssContext ctx = build_context(series, spec);
	const ParamLayout lay{spec.p, spec.q, spec.P, spec.Q,
	                      static_cast<int>(spec.exog_names.size()), spec.has_intercept()};
	if (ctx.dy.size() < static_cast<std::size_t>(10 * std::max(1, lay.total()))) {
		throw ConfigError("training length after differencing (" + std::to_string(ctx.dy.size()) +
		                  ") is below 10x the parameter count (" + std::to_string(lay.total()) +
		                  ") for " + spec.label());
	}

	SarimaxFit fit;
	fit.spec = spec;
	fit.data = std::make_shared<DailySeries>(series);

	std::vector<double> init = initial_parameters(ctx, lay);
	if (lay.total() == 0) {
		finalize_fit(fit, ctx, Decoded{});
		return fit;
	}

	const auto objective = [&](const std::vector<double> &params) -> double {
		const Decoded dec = decode(params, lay);
		const double ssq = ctx.sum_squares(dec);
		if (!(ssq > 0.0) || !std::isfinite(ssq)) {
			return kInf;
		}
		return 0.5 * std::log(ssq / static_cast<double>(ctx.n_eff));
	};

	OptimOptions opts;
	opts.max_iterations = 500;
	opts.gradient_tolerance = 1e-8;
	const OptimResult res = minimize_bfgs(objective, std::move(init), opts);
	fit.iterations = res.iterations;
	if (!res.converged) {
		std::ostringstream os;
		os << "SARIMAX estimation did not converge for " << spec.label() << " after "
		   << res.iterations << " iterations; best objective " << res.value;
		throw EstimationError(os.str());
	}
	if (!std::isfinite(res.value)) {
		throw EstimationError("SARIMAX objective non-finite at solution for " + spec.label());
	}

	finalize_fit(fit, ctx, decode(res.x, lay));
	return fit;
}

SarimaxFit refilter(const SarimaxFit &fit, const DailySeries &series) {
	SarimaxFit out = fit;
	out.data = std::make_shared<DailySeries>(series);
	const CssContext ctx = build_context(series, fit.spec);
	Decoded dec;
	dec.ar = fit.ar;
	dec.ma = fit.ma;
	dec.sar = fit.seasonal_ar;
	dec.sma = fit.seasonal_ma;
	dec.beta = fit.exog_coef;
	dec.intercept = fit.intercept;

	const double ssq = ctx.sum_squares(dec);
	out.residuals.assign(ctx.a.begin() + static_cast<std::ptrdiff_t>(ctx.burnin), ctx.a.end());
	out.residual_offset =
	    static_cast<std::size_t>(fit.spec.d + fit.spec.s * fit.spec.D) + ctx.burnin;
	// sigma2 stays at its estimation value; loglik reflects the new data.
	out.loglik = -0.5 * static_cast<double>(ctx.n_eff) *
	             (std::log(2.0 * M_PI) + std::log(fit.sigma2) + ssq / (ctx.n_eff * fit.sigma2));
	return out;
}

const std::vector<double> &residual_series(const SarimaxFit &fit) {
	return fit.residuals;
}

std::vector<double> psi_weights(const SarimaxFit &fit, int count) {
	const auto pf = expand_seasonal_polynomial(fit.ar, fit.seasonal_ar, fit.spec.s);
	const auto mf = expand_seasonal_polynomial(fit.ma, fit.seasonal_ma, fit.spec.s);

	// A(B) = (1 - sum pf_j B^j) * (1-B)^d * (1-B^s)^D in plain coefficient form.
	std::vector<double> A{1.0};
	A.insert(A.end(), pf.begin(), pf.end());
	for (std::size_t j = 1; j < A.size(); ++j) {
		A[j] = -A[j];
	}
	auto poly_mul = [](const std::vector<double> &a, const std::vector<double> &b) {
		std::vector<double> r(a.size() + b.size() - 1, 0.0);
		for (std::size_t i = 0; i < a.size(); ++i) {
			for (std::size_t j = 0; j < b.size(); ++j) {
				r[i + j] += a[i] * b[j];
			}
		}
		return r;
	};
	for (int i = 0; i < fit.spec.d; ++i) {
		A = poly_mul(A, {1.0, -1.0});
	}
	if (fit.spec.D > 0) {
		std::vector<double> seasonal(static_cast<std::size_t>(fit.spec.s) + 1, 0.0);
		seasonal.front() = 1.0;
		seasonal.back() = -1.0;
		for (int i = 0; i < fit.spec.D; ++i) {
			A = poly_mul(A, seasonal);
		}
	}

	std::vector<double> psi(static_cast<std::size_t>(count));
	for (int k = 0; k < count; ++k) {
		double v = 0.0;
		if (k == 0) {
			v = 1.0;
		} else {
			if (static_cast<std::size_t>(k) <= mf.size()) {
				v = -mf[static_cast<std::size_t>(k) - 1];
			}
			const int jmax = std::min<int>(k, static_cast<int>(A.size()) - 1);
			for (int j = 1; j <= jmax; ++j) {
				v -= A[static_cast<std::size_t>(j)] * psi[static_cast<std::size_t>(k - j)];
			}
		}
		psi[static_cast<std::size_t>(k)] = v;
	}
	return psi;
}

ForecastResult forecast(const SarimaxFit &fit, int horizon, const ExogTable &future_exog,
                        double alpha) {
	if (horizon < 1) {
		throw ConfigError("forecast horizon must be >= 1");
	}
	if (!fit.data) {
		throw ConfigError("fit has no attached training data");
	}
	const SarimaxSpec &spec = fit.spec;
	const std::size_t h = static_cast<std::size_t>(horizon);

	// Future exogenous rows are required exactly when the model uses regressors.
	std::vector<const std::vector<double> *> fx;
	for (const auto &name : spec.exog_names) {
		const ExogColumn *found = nullptr;
		for (const auto &col : future_exog) {
			if (col.name == name) {
				found = &col;
				break;
			}
		}
		if (found == nullptr || found->values.size() < h) {
			throw ConfigError("missing future exogenous rows for column '" + name + "'");
		}
		fx.push_back(&found->values);
	}

	const DailySeries &series = *fit.data;
	const std::size_t n = series.size();

	// Regression-adjusted series n_t = y_t - c - beta'x_t.
	std::vector<double> adj(series.values());
	for (std::size_t k = 0; k < spec.exog_names.size(); ++k) {
		const auto &col = series.exog_column(spec.exog_names[k]).values;
		const double b = fit.exog_coef[k];
		for (std::size_t t = 0; t < n; ++t) {
			adj[t] -= b * col[t];
		}
	}
	if (spec.has_intercept()) {
		for (std::size_t t = 0; t < n; ++t) {
			adj[t] -= fit.intercept;
		}
	}

	// Seasonal difference levels: slevels[j] = seasonal difference applied j times.
	std::vector<std::vector<double>> slevels(static_cast<std::size_t>(spec.D) + 1);
	slevels[0] = adj;
	for (int j = 1; j <= spec.D; ++j) {
		slevels[static_cast<std::size_t>(j)] =
		    difference(slevels[static_cast<std::size_t>(j - 1)], static_cast<std::size_t>(spec.s));
	}
	// Regular difference levels on top of the seasonal ones.
	std::vector<std::vector<double>> dlevels(static_cast<std::size_t>(spec.d) + 1);
	dlevels[0] = slevels[static_cast<std::size_t>(spec.D)];
	for (int j = 1; j <= spec.d; ++j) {
		dlevels[static_cast<std::size_t>(j)] = difference(dlevels[static_cast<std::size_t>(j - 1)], 1);
	}

	std::vector<double> &w = dlevels[static_cast<std::size_t>(spec.d)];
	const auto pf = expand_seasonal_polynomial(fit.ar, fit.seasonal_ar, spec.s);
	const auto mf = expand_seasonal_polynomial(fit.ma, fit.seasonal_ma, spec.s);
	const std::size_t burnin = static_cast<std::size_t>(
	    std::max(spec.p + spec.s * spec.P, spec.q + spec.s * spec.Q));
	std::vector<double> a;
	css_filter(w, pf, mf, burnin, a);
	a.resize(w.size() + h, 0.0); // future innovations have mean zero

	// Recursive mean path on the differenced scale, then integrate back.
	for (std::size_t step = 0; step < h; ++step) {
		const std::size_t idx = w.size();
		double v = 0.0;
		for (std::size_t j = 1; j <= pf.size() && j <= idx; ++j) {
			v += pf[j - 1] * w[idx - j];
		}
		for (std::size_t j = 1; j <= mf.size() && j <= idx; ++j) {
			v -= mf[j - 1] * a[idx - j];
		}
		w.push_back(v);
		for (std::size_t lvl = static_cast<std::size_t>(spec.d); lvl-- > 0;) {
			dlevels[lvl].push_back(dlevels[lvl].back() + dlevels[lvl + 1].back());
		}
		if (spec.D > 0) {
			slevels[static_cast<std::size_t>(spec.D)].push_back(dlevels[0].back());
			for (std::size_t lvl = static_cast<std::size_t>(spec.D); lvl-- > 0;) {
				auto &cur = slevels[lvl];
				cur.push_back(cur[cur.size() - static_cast<std::size_t>(spec.s)] +
				              slevels[lvl + 1].back());
			}
		}
	}

	const std::vector<double> &npath = spec.D > 0 ? slevels[0] : dlevels[0];
	ForecastResult out;
	out.mean.resize(h);
	out.lower.resize(h);
	out.upper.resize(h);
	const std::size_t base_len = npath.size() - h;
	const double z = interval_z(alpha);
	const auto psi = psi_weights(fit, horizon);
	double var_acc = 0.0;
	for (std::size_t step = 0; step < h; ++step) {
		double m = npath[base_len + step];
		if (spec.has_intercept()) {
			m += fit.intercept;
		}
		for (std::size_t k = 0; k < fx.size(); ++k) {
			m += fit.exog_coef[k] * (*fx[k])[step];
		}
		var_acc += psi[step] * psi[step];
		const double hw = z * std::sqrt(fit.sigma2 * var_acc);
		out.mean[step] = m;
		out.lower[step] = m - hw;
		out.upper[step] = m + hw;
	}
	return out;
}

std::string sarimax_report(const SarimaxFit &fit) {
	KeyValueDoc doc;
	doc.set("kind", "sarimax");
	doc.set_int("p", fit.spec.p);
	doc.set_int("d", fit.spec.d);
	doc.set_int("q", fit.spec.q);
	doc.set_int("P", fit.spec.P);
	doc.set_int("D", fit.spec.D);
	doc.set_int("Q", fit.spec.Q);
	doc.set_int("s", fit.spec.s);
	doc.set_strings("exog", fit.spec.exog_names);
	doc.set_doubles("ar", fit.ar);
	doc.set_doubles("ma", fit.ma);
	doc.set_doubles("seasonal_ar", fit.seasonal_ar);
	doc.set_doubles("seasonal_ma", fit.seasonal_ma);
	doc.set_doubles("beta", fit.exog_coef);
	doc.set_double("intercept", fit.intercept);
	doc.set_double("sigma2", fit.sigma2);
	doc.set_double("loglik", fit.loglik);
	return doc.to_string();
}

SarimaxFit sarimax_from_report(const std::string &report, const DailySeries &series) {
	const KeyValueDoc doc = KeyValueDoc::parse(report);
	if (doc.get("kind") != "sarimax") {
		throw DataError("checkpoint is not a sarimax model");
	}
	SarimaxFit fit;
	fit.spec.p = static_cast<int>(doc.get_int("p"));
	fit.spec.d = static_cast<int>(doc.get_int("d"));
	fit.spec.q = static_cast<int>(doc.get_int("q"));
	fit.spec.P = static_cast<int>(doc.get_int("P"));
	fit.spec.D = static_cast<int>(doc.get_int("D"));
	fit.spec.Q = static_cast<int>(doc.get_int("Q"));
	fit.spec.s = static_cast<int>(doc.get_int("s"));
	fit.spec.exog_names = doc.get_strings("exog");
	fit.ar = doc.get_doubles("ar");
	fit.ma = doc.get_doubles("ma");
	fit.seasonal_ar = doc.get_doubles("seasonal_ar");
	fit.seasonal_ma = doc.get_doubles("seasonal_ma");
	fit.exog_coef = doc.get_doubles("beta");
	fit.intercept = doc.get_double("intercept");
	fit.sigma2 = doc.get_double("sigma2");
	fit.loglik = doc.get_double("loglik");
	return refilter(fit, series);
}

} // namespace fuelcast
