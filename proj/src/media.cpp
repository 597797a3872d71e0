#include "docrepair/media.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "docrepair/kernels.hpp"

namespace docrepair {

Frame::Frame(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ < 1 || height_ < 1) throw ImageError("frame dimensions must be positive");
    if (pixels_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
        throw ImageError("frame pixel count does not match dimensions");
    for (double v : pixels_)
        if (!(v >= 0.0 && v <= 1.0)) throw ImageError("frame intensity outside [0,1]");
}

Frame Frame::filled(int width, int height, double value) {
    return Frame(width, height, std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), value));
}

double ssim(const Frame& a, const Frame& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw DimensionMismatch("ssim: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto m = kernels::moments(a.pixels(), b.pixels());
    const double num = (2.0 * m.mean_a * m.mean_b + c1) * (2.0 * m.cov + c2);
    const double den = (m.mean_a * m.mean_a + m.mean_b * m.mean_b + c1) * (m.var_a + m.var_b + c2);
    return num / den;
}

std::vector<std::size_t> keyframe_indices(const std::vector<Frame>& frames, double threshold) {
    if (frames.empty()) throw Error("extract_keyframes: no frames");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("keyframe threshold must lie in (0,1)");
    std::vector<std::size_t> kept{0};
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (ssim(frames[kept.back()], frames[i]) < threshold) kept.push_back(i);
    return kept;
}

std::vector<Frame> extract_keyframes(const std::vector<Frame>& frames, double threshold) {
    std::vector<Frame> out;
    for (std::size_t i : keyframe_indices(frames, threshold)) out.push_back(frames[i]);
    return out;
}

Frame decode_png(std::string_view bytes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw ImageError(std::string("png decode: ") + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw ImageError(std::string("png decode: ") + image.message);
    }
    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < px.size(); ++i) {
        const unsigned sum = buf[3 * i] + buf[3 * i + 1] + buf[3 * i + 2];
        px[i] = sum / (3.0 * 255.0);
    }
    return Frame(w, h, std::move(px));
}

Frame load_png(const std::filesystem::path& path) {
    try {
        return decode_png(read_file(path));
    } catch (const ImageError& e) {
        throw ImageError(path.string() + ": " + e.what());
    }
}

std::string encode_png(const Frame& frame) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(frame.width());
    image.height = static_cast<png_uint_32>(frame.height());
    image.format = PNG_FORMAT_GRAY;
    std::vector<unsigned char> px(frame.pixels().size());
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<unsigned char>(std::lround(frame.pixels()[i] * 255.0));
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr))
        throw ImageError(std::string("png encode: ") + image.message);
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr))
        throw ImageError(std::string("png encode: ") + image.message);
    out.resize(size);
    return out;
}

void save_png(const Frame& frame, const std::filesystem::path& path) { write_file(path, encode_png(frame)); }

std::string to_string(AttachmentKind kind) {
    switch (kind) {
        case AttachmentKind::image: return "image";
        case AttachmentKind::animation: return "animation";
        case AttachmentKind::video: return "video";
    }
    return "unknown";
}

std::string to_string(QueryOrigin origin) {
    return origin == QueryOrigin::raw_issue ? "raw_issue" : "llm_textualization";
}

IssueBundle load_issue(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("issue " + path.string() + ": " + e.what());
    }
    IssueBundle issue;
    const auto base = path.parent_path();
    try {
        issue.id = j.at("id").get<std::string>();
        issue.title = j.value("title", "");
        issue.body = j.value("body", "");
        issue.repo = j.value("repo", "");
        for (const auto& a : j.value("attachments", nlohmann::json::array())) {
            Attachment att;
            const auto kind = a.value("kind", "image");
            if (kind == "image") att.kind = AttachmentKind::image;
            else if (kind == "animation") att.kind = AttachmentKind::animation;
            else if (kind == "video") att.kind = AttachmentKind::video;
            else throw ConfigError("issue " + path.string() + ": unknown attachment kind " + kind);
            for (const auto& f : a.at("frame_files")) {
                const auto file = base / f.get<std::string>();
                std::string bytes = read_file(file);
                try {
                    att.frames.push_back(decode_png(bytes));
                } catch (const ImageError& e) {
                    throw ImageError(file.string() + ": " + e.what());
                }
                att.encoded.push_back(std::move(bytes));
            }
            if (att.frames.empty()) throw ConfigError("issue " + path.string() + ": attachment without frames");
            issue.attachments.push_back(std::move(att));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("issue " + path.string() + ": " + e.what());
    }
    if (issue.id.empty()) throw ConfigError("issue " + path.string() + ": empty id");
    return issue;
}

std::string raw_issue_text(const IssueBundle& issue) { return issue.title + "\n" + issue.body; }

std::vector<Query> textualize_issue(const IssueBundle& issue, LlmGateway& llm, const TextualizeOptions& options) {
    std::vector<Query> queries;
    queries.push_back({raw_issue_text(issue), QueryOrigin::raw_issue});
    if (!issue.multimodal()) return queries;

    Message msg{"user", "", {}};
    for (const auto& att : issue.attachments)
        for (std::size_t i : keyframe_indices(att.frames, options.ssim_threshold))
            msg.images.push_back(Image{"image/png", att.encoded.at(i)});

    const PromptSet defaults;
    const PromptSet& prompts = options.prompts ? *options.prompts : defaults;
    msg.text = prompts.render("textualize", {{"title", issue.title},
                                             {"body", issue.body},
                                             {"image_count", std::to_string(msg.images.size())}});
    LlmRequest req;
    req.stage = options.stage;
    req.model_id = options.model_id;
    req.temperature = Temperature(0);
    req.seed = options.seed;
    req.messages.push_back(std::move(msg));

    const std::string ctx = "issue " + issue.id + ": ";
    LlmResponse resp;
    try {
        resp = llm.complete(req);
    } catch (const ProviderError& e) {
        throw ProviderError(ctx + e.what(), e.retryable());
    } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(ctx + e.what());
    } catch (const LlmError& e) {
        throw LlmError(ctx + e.what());
    }
    const std::string text(trim(resp.text));
    if (text.empty()) throw LlmError(ctx + "empty textualization");
    queries.push_back({text, QueryOrigin::llm_textualization});
    return queries;
}

}  // namespace docrepair
