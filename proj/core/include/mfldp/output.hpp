#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mfldp/trajectory.hpp"

namespace mfldp {

// RFC-4180 CSV writer: CRLF records, '.' decimal separator, doubles at 17
// significant digits so rereads are bit-exact.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    std::string str() const;
    void write_file(const std::string& path) const;

    static std::string fmt(double x);
    static std::string fmt(long x);
    static std::string fmt(int x);

private:
    static std::string escape(const std::string& cell);
    std::string body_;
    std::size_t columns_ = 0;
};

// Trajectory dump with columns (replica, particle, k, t, c, w_1..w_d').
void write_trajectory_csv(const std::string& path, const TrajectoryMeasure& traj, int replica);

std::string sha256_hex(const std::string& data);

// Minimal SVG line plot (series of (x, y) polylines with log-ready values
// precomputed by the caller). Convenience only; every plot is derivable from
// the CSVs.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};
void write_svg_lineplot(const std::string& path, const std::string& title,
                        const std::vector<PlotSeries>& series);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mfldp
