#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <string>

#include "eap/common.hpp"

namespace eap {

// One per-update record; the same schema serves pretraining, EAP training,
// and baselines (inapplicable fields stay zero).
struct MetricsRow {
    std::string phase;  // pretrain | train
    int update = 0;
    int env_index = -1;
    std::int64_t total_samples = 0;   // policy + error-function samples
    std::int64_t policy_samples = 0;
    std::int64_t error_samples = 0;
    double mean_return = 0.0;
    int episodes = 0;
    double err_loss = 0.0;
    double surrogate_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
    int ppo_epochs = 0;
    std::int64_t predictor_faults = 0;
    std::int64_t collect_skipped = 0;
    int fault = 0;  // 1 when the iteration aborted on a component fault
};

using MetricsSink = std::function<void(const MetricsRow&)>;

inline MetricsSink null_sink() {
    return [](const MetricsRow&) {};
}

// Versioned CSV stream; every row is flushed so a mid-run failure keeps the
// metrics written so far.
class MetricsWriter {
public:
    static constexpr const char* kSchema =
        "phase,update,env_index,total_samples,policy_samples,error_samples,mean_return,"
        "episodes,err_loss,surrogate_loss,value_loss,entropy,approx_kl,clip_fraction,"
        "ppo_epochs,predictor_faults,collect_skipped,fault";

    explicit MetricsWriter(const std::string& path, bool append = false) {
        const bool fresh = !append || !std::ifstream(path).good();
        out_.open(path, fresh ? std::ios::out : std::ios::app);
        if (!out_) throw RuntimeFailure("cannot open metrics file: " + path);
        if (fresh) {
            out_ << "# eap-metrics v1\n" << kSchema << "\n";
            out_.flush();
        }
    }

    void append(const MetricsRow& r) {
        out_ << r.phase << ',' << r.update << ',' << r.env_index << ',' << r.total_samples << ','
             << r.policy_samples << ',' << r.error_samples << ',' << fmt(r.mean_return) << ','
             << r.episodes << ',' << fmt(r.err_loss) << ',' << fmt(r.surrogate_loss) << ','
             << fmt(r.value_loss) << ',' << fmt(r.entropy) << ',' << fmt(r.approx_kl) << ','
             << fmt(r.clip_fraction) << ',' << r.ppo_epochs << ',' << r.predictor_faults << ','
             << r.collect_skipped << ',' << r.fault << "\n";
        out_.flush();
    }

    MetricsSink sink() {
        return [this](const MetricsRow& r) { append(r); };
    }

private:
    static std::string fmt(double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    std::ofstream out_;
};

}  // namespace eap
