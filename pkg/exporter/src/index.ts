export {
  BACKBONE_SPECS,
  Backbone,
  BackboneSpec,
  STUB_SPEC,
  assertTapShapes,
  buildStubBackbone,
  loadGraphBackbone,
} from './backbone';
export {
  CHANNEL_MEAN,
  CHANNEL_STD,
  RgbImage,
  decodeImage,
  normalizeChannels,
  prepareImage,
  resizeBilinear,
} from './image';
export {
  ExtractorConfig,
  ExtractResult,
  SkipRecord,
  extract,
  listImages,
} from './extract';
export {
  DecodedFeatures,
  FeatureLayer,
  decodeFeatures,
  encodeFeatures,
  readFeatures,
  writeFeatures,
} from './uofv1';
