#pragma once

#include "ddes/analysis.hpp"
#include "ddes/certificates.hpp"
#include "ddes/stepper.hpp"

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace ddes {

// All emitted numbers use 12 significant digits.
std::string format_num(double v);

enum class ReportFormat { kv, table };

// Ordered key/value report; `kv` prints machine-readable `key = value` lines,
// `table` a padded two-column view of the same values.
class Report {
public:
    void put(const std::string& key, double value);
    void put(const std::string& key, const std::string& value);
    void put(const std::string& key, const char* value);
    void put(const std::string& key, bool value);
    void put_int(const std::string& key, long long value);
    void blank();

    void write(std::ostream& os, ReportFormat format) const;
    const std::vector<std::pair<std::string, std::string>>& rows() const { return rows_; }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

// CSV writing: one header row, then 12-significant-digit values.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_envelope_csv(std::ostream& os, const EnvelopeReport& rep);

Report global_certificate_report(const GlobalCertificate& cert);
Report small_data_certificate_report(const SmallDataCertificate& cert);
Report linear_delay_report(const LinearDelayCertificate& cert, bool coarse);
Report admissibility_report(const AdmissibilityReport& rep);

} // namespace ddes
