#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "docrepair/common.hpp"
#include "docrepair/llm.hpp"
#include "docrepair/prompts.hpp"

namespace docrepair {

/// Grayscale raster with intensities in [0,1], row-major.
class Frame {
public:
    Frame(int width, int height, std::vector<double> pixels);
    static Frame filled(int width, int height, double value);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<double>& pixels() const { return pixels_; }
    double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    bool operator==(const Frame&) const = default;

private:
    int width_;
    int height_;
    std::vector<double> pixels_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ImageError : public Error {
public:
    using Error::Error;
};

/// Global (unwindowed) SSIM with C1 = 0.01^2, C2 = 0.03^2.
double ssim(const Frame& a, const Frame& b);

/// Indices of kept frames: the first, then each frame whose similarity to
/// the last kept one falls below the threshold.
std::vector<std::size_t> keyframe_indices(const std::vector<Frame>& frames, double threshold = 0.95);
std::vector<Frame> extract_keyframes(const std::vector<Frame>& frames, double threshold = 0.95);

/// Color input is reduced to the mean of R, G and B; alpha is ignored.
Frame decode_png(std::string_view bytes);
Frame load_png(const std::filesystem::path& path);
/// 8-bit grayscale PNG.
std::string encode_png(const Frame& frame);
void save_png(const Frame& frame, const std::filesystem::path& path);

enum class AttachmentKind { image, animation, video };

std::string to_string(AttachmentKind kind);

struct Attachment {
    AttachmentKind kind = AttachmentKind::image;
    std::vector<Frame> frames;
    std::vector<std::string> encoded;  // original file bytes, parallel to frames
};

struct IssueBundle {
    std::string id;
    std::string title;
    std::string body;
    std::vector<Attachment> attachments;
    std::string repo;  // optional grouping key

    bool multimodal() const { return !attachments.empty(); }
};

/// Reads {id, title, body, repo?, attachments: [{kind, frame_files}]}.
/// Frame paths are relative to the issue file.
IssueBundle load_issue(const std::filesystem::path& path);

enum class QueryOrigin { raw_issue, llm_textualization };

std::string to_string(QueryOrigin origin);

struct Query {
    std::string text;
    QueryOrigin origin = QueryOrigin::raw_issue;
};

struct TextualizeOptions {
    std::string model_id;
    std::optional<std::int64_t> seed;
    double ssim_threshold = 0.95;
    Stage stage = Stage::retrieval;
    const PromptSet* prompts = nullptr;  // built-in templates when null
};

/// Raw issue text as a query, plus one LLM analysis over text and keyframes
/// when the issue carries attachments.
std::vector<Query> textualize_issue(const IssueBundle& issue, LlmGateway& llm, const TextualizeOptions& options);

std::string raw_issue_text(const IssueBundle& issue);

}  // namespace docrepair
