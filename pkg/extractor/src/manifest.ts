import { readFileSync } from "node:fs";
import { RawPost } from "./types.js";

/** Read a JSONL manifest of posts; one {id, text, image, label} per line. */
export function readManifest(path: string): RawPost[] {
  const posts: RawPost[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    let obj: unknown;
    try {
      obj = JSON.parse(trimmed);
    } catch (e) {
      throw new Error(`${path}:${i + 1}: invalid JSON (${(e as Error).message})`);
    }
    posts.push(validatePost(obj, `${path}:${i + 1}`));
  });
  return posts;
}

function validatePost(obj: unknown, where: string): RawPost {
  if (typeof obj !== "object" || obj === null) {
    throw new Error(`${where}: post must be an object`);
  }
  const post = obj as Record<string, unknown>;
  if (typeof post.id !== "string" || post.id.length === 0) {
    throw new Error(`${where}: missing or empty id`);
  }
  if (typeof post.text !== "string" || post.text.trim().length === 0) {
    throw new Error(`${where}: text must be a non-empty string`);
  }
  const image = post.image;
  const imageOk = typeof image === "string"
    || (Array.isArray(image) && image.length > 0
        && image.every((p) => typeof p === "string"));
  if (!imageOk) {
    throw new Error(`${where}: image must be a path or non-empty array of paths`);
  }
  if (post.label !== 0 && post.label !== 1) {
    throw new Error(`${where}: label must be 0 (real) or 1 (fake)`);
  }
  return {
    id: post.id,
    text: post.text,
    image: image as string | string[],
    label: post.label,
  };
}
