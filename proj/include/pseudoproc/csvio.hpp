#pragma once

#include <string>
#include <vector>

#include "pseudoproc/models.hpp"
#include "pseudoproc/processes.hpp"

namespace pseudoproc {

/// Reads a comma-separated file with a header line into a Sample. Blank
/// lines are skipped; non-numeric cells and rows of the wrong width are
/// errors carrying the 1-based physical line number.
Sample ingest_csv(const std::string& path, int dim);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Long-format path CSV: rep,grid_id,index_0[,index_1,...],value
std::string paths_to_csv(const std::vector<ProcessPath>& paths);

/// Covariance CSV: row,col,row_label,col_label,value,se
std::string covariance_to_csv(const CovarianceEstimate& est);

}  // namespace pseudoproc
