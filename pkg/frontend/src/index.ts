export * from "./formats.js";
export * from "./raster.js";
export * from "./figures.js";
export * from "./svg.js";
export * from "./render.js";
