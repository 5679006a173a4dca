import { SurveyApi } from './api.js';
import { SurveyController } from './controller.js';
import { render } from './render.js';

// backend origin: same-origin by default, ?api=http://host:port to override
const params = new URLSearchParams(window.location.search);
const api = new SurveyApi(params.get('api') ?? '');

const root = document.getElementById('app') as HTMLElement;
const controller: SurveyController = new SurveyController(api, () =>
  render(controller, root));
render(controller, root);
